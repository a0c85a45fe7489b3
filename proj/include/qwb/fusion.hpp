// Copyright 2026 The qwbench Authors
// SPDX-License-Identifier: Apache-2.0

// Hybrid retrieval over a per-query candidate union: min-max normalized
// score interpolation (static or BM25-gated alpha), reciprocal rank fusion,
// the alpha-oracle diagnostic, guarded cross-encoder re-ranking and
// dual-channel combination.

#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "qwb/ranking.hpp"

namespace qwb {

inline constexpr double kDefaultAlphaGrid[] = {0.0, 0.1, 0.2, 0.3, 0.5, 0.8, 1.0};

enum class DualMode { kOff, kDualScore, kRrf };

std::string_view to_string(DualMode mode);
DualMode dual_mode_from_string(std::string_view name);

struct FusionConfig {
  double alpha = 0.7;
  bool dynamic = false;
  std::vector<double> alpha_grid{std::begin(kDefaultAlphaGrid), std::end(kDefaultAlphaGrid)};
  std::size_t rrf_k = 60;
  std::size_t top_k = 10;
  double ce_std_floor = 1e-6;
  DualMode dual = DualMode::kOff;

  void validate() const;
  nlohmann::json to_json() const;
};

struct Candidate {
  std::string id;
  double bm25_raw = 0.0;
  double embed_raw = 0.0;
  double bm25_norm = 0.0;
  double embed_norm = 0.0;
  bool from_bm25 = false;
  bool from_embed = false;
};

struct CandidateSet {
  std::string qid;
  std::vector<Candidate> entries;  // ascending id
};

/// Union of the two lists. A candidate missing from one source gets that
/// source's minimum raw score over the union; each source is then min-max
/// normalized (a constant source maps to 0.5). Throws
/// Error(kEmptyCandidates) when both lists are empty.
CandidateSet candidate_union(std::string qid, const Ranking& bm25, const Ranking& embed);

/// Min-max to [0, 1]; constant input maps to 0.5.
std::vector<double> min_max(std::span<const double> x);

/// fused = alpha * embed_norm + (1 - alpha) * bm25_norm. Throws
/// Error(kInvalidAlpha) outside [0, 1].
Ranking interpolate(const CandidateSet& cands, double alpha);

struct DynamicAlpha {
  double margin = 0.0;
  double alpha_used = 0.0;
  Ranking ranking;
};

/// m = (s1 - s2) / max(s1, eps) over the raw BM25 top two, alpha_used =
/// base_alpha * (1 - clamp(m, 0, 1)). One BM25 candidate gives m = 1; none
/// gives m = 0.
DynamicAlpha dynamic_alpha(const CandidateSet& cands, double base_alpha, double eps = 1e-12);

/// score(u) = sum over lists of 1 / (k + rank), 1-based ranks.
Ranking rrf(std::span<const Ranking> lists, std::size_t k = 60);

enum class OracleMetric { kReciprocalRank, kNdcg };

struct OracleQuery {
  std::string qid;
  double best_alpha = 0.0;
  double best_metric = 0.0;
  std::vector<double> per_alpha;  // aligned with the grid
};

struct OracleResult {
  std::vector<double> grid;
  std::vector<OracleQuery> queries;
  std::vector<double> fixed_alpha_aggregate;  // mean metric per grid alpha
  double aggregate = 0.0;                     // mean of per-query maxima

  nlohmann::json to_json() const;
};

/// Per-query best metric over the grid (ties go to the smallest alpha).
/// Throws Error(kMissingRanking) for a candidate set without a judgment.
OracleResult alpha_oracle(std::span<const CandidateSet> sets, std::span<const double> grid,
                          const std::map<std::string, std::string>& relevant,
                          OracleMetric metric = OracleMetric::kReciprocalRank);

/// Cross-encoder scores keyed by (qid, unit id).
class CeScores {
 public:
  void set(const std::string& qid, const std::string& unit, double score);
  std::optional<double> get(const std::string& qid, const std::string& unit) const;
  std::size_t size() const { return scores_.size(); }

  /// TSV: qid \t unit_id \t score. Throws Error(kParse) on bad or
  /// non-finite rows.
  static CeScores read_tsv(const std::filesystem::path& path);

 private:
  std::map<std::pair<std::string, std::string>, double> scores_;
};

struct CeOutcome {
  Ranking ranking;
  bool applied = false;
  std::string reason;  // applied, missing_scores, degenerate, negative_correlation,
                       // undefined_correlation, empty
  double coverage = 0.0;
  std::optional<double> ce_std;
  std::optional<double> spearman;
};

/// Re-ranks the first top_k entries of `ranked` by CE score unless a guard
/// fires, in which case `ranked` is returned unchanged. Scores in the output
/// are the base scores.
CeOutcome ce_rerank(const Ranking& ranked, const std::string& qid, const CeScores& ce,
                    std::size_t top_k, double std_floor = 1e-6);

/// Combination of the current and amplitude channel lists.
Ranking dual_channel(const Ranking& current, const Ranking& amp, DualMode mode,
                     std::size_t rrf_k = 60);

}  // namespace qwb
