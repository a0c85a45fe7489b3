// Copyright 2026 The qwbench Authors
// SPDX-License-Identifier: Apache-2.0

// Retrieval metrics with a single relevant unit per query, correlation
// statistics, and pairwise-similarity reports.

#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "qwb/ranking.hpp"

namespace qwb {

inline constexpr std::size_t kMetricCutoff = 10;

struct QueryJudgment {
  std::string qid;
  std::string relevant;
};

/// 1-based rank of `relevant` in `ranked`, or 0 when absent.
std::size_t rank_of(std::span<const std::string> ranked, const std::string& relevant);

/// 1/rank when 1 <= rank <= cutoff, else 0.
double reciprocal_rank(std::size_t rank, std::size_t cutoff = kMetricCutoff);

/// 1/log2(rank + 1) when 1 <= rank <= cutoff, else 0.
double ndcg_single(std::size_t rank, std::size_t cutoff = kMetricCutoff);

struct QueryMetrics {
  std::string qid;
  std::string relevant;
  std::size_t rank = 0;  // 0 = not retrieved
  std::vector<double> hit;
  double rr = 0.0;
  double ndcg = 0.0;
  double ap = 0.0;
};

struct MetricsReport {
  std::string method;
  std::vector<std::size_t> k_list;
  std::vector<double> hit;  // aligned with k_list
  double mrr = 0.0;
  double ndcg = 0.0;
  double map = 0.0;
  std::vector<QueryMetrics> per_query;

  nlohmann::json to_json() const;
};

/// `rankings` maps qid to ranked unit ids. Throws Error(kMissingRanking)
/// when a judged query has no ranking.
MetricsReport retrieval_metrics(const std::map<std::string, std::vector<std::string>>& rankings,
                                std::span<const QueryJudgment> judgments,
                                std::span<const std::size_t> k_list,
                                std::string method = "run");

MetricsReport retrieval_metrics(const std::map<std::string, std::vector<std::string>>& rankings,
                                std::span<const QueryJudgment> judgments,
                                std::string method = "run");

/// Table with columns Method | H@1 H@3 H@5 H@10 nDCG MRR MAP.
std::string markdown_table(std::span<const MetricsReport> reports);

/// Sample Pearson r. Throws Error(kUndefined) for fewer than 2 points or
/// zero variance in either argument, Error(kDimensionMismatch) for unequal
/// lengths.
double pearson(std::span<const double> x, std::span<const double> y);

/// 1-based fractional ranks; tied values share their mean rank.
std::vector<double> average_ranks(std::span<const double> x);

/// Pearson over average ranks.
double spearman(std::span<const double> x, std::span<const double> y);

struct Histogram {
  double lo = -1.0;
  double hi = 1.0;
  std::vector<std::size_t> counts;

  double bin_left(std::size_t i) const;
  std::size_t total() const;
  /// Fraction of values in bins whose left edge is >= x.
  double mass_from(double x) const;
  nlohmann::json to_json() const;
};

/// Uniform bins over [lo, hi]; values outside are clamped into the end bins.
Histogram make_histogram(std::span<const double> values, std::size_t bins = 20, double lo = -1.0,
                         double hi = 1.0);

/// CSV with header "bin_left,count".
void write_histogram_csv(const std::filesystem::path& path, const Histogram& h);

enum class Regime { kSim, kNeutral, kDissim };

std::string_view to_string(Regime regime);
Regime regime_from_string(std::string_view name);

struct PairRecord {
  std::string a;
  std::string b;
  double score = 0.0;
  Regime regime = Regime::kNeutral;
};

/// TSV: sentence_a \t sentence_b \t score \t regime. Blank lines are skipped.
std::vector<PairRecord> read_pairs_tsv(const std::filesystem::path& path);
void write_pairs_tsv(const std::filesystem::path& path, std::span<const PairRecord> pairs);

struct RegimeStats {
  std::size_t n = 0;
  double mean_sim = 0.0;
  double mean_ref = 0.0;
  double mae = 0.0;
};

struct PairwiseReport {
  std::size_t n = 0;
  std::optional<double> pearson;   // empty when undefined
  std::optional<double> spearman;  // empty when undefined
  double mae = 0.0;
  double mean_sim = 0.0;
  std::map<std::string, RegimeStats> regimes;
  Histogram histogram;

  nlohmann::json to_json() const;
};

/// Compares per-pair cosines against reference scores. Correlations that are
/// undefined (zero variance) are left empty so the collapse case still yields
/// a report; pearson()/spearman() raise on the same inputs.
PairwiseReport pairwise_report(std::span<const double> cosines, std::span<const PairRecord> pairs);

}  // namespace qwb
