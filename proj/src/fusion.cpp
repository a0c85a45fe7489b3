// Copyright 2026 The qwbench Authors
// SPDX-License-Identifier: Apache-2.0

#include "qwb/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "qwb/error.hpp"
#include "qwb/evalkit.hpp"

namespace qwb {

std::string_view to_string(DualMode mode) {
  switch (mode) {
    case DualMode::kOff: return "off";
    case DualMode::kDualScore: return "dual_score";
    case DualMode::kRrf: return "rrf";
  }
  return "off";
}

DualMode dual_mode_from_string(std::string_view name) {
  if (name == "off") return DualMode::kOff;
  if (name == "dual_score") return DualMode::kDualScore;
  if (name == "rrf") return DualMode::kRrf;
  throw Error(ErrorCode::kInvalidConfig, "unknown dual mode: " + std::string(name));
}

void FusionConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::kInvalidAlpha, "alpha must lie in [0, 1]");
  }
  if (alpha_grid.empty()) throw Error(ErrorCode::kInvalidConfig, "alpha grid is empty");
  for (std::size_t i = 0; i < alpha_grid.size(); ++i) {
    if (!(alpha_grid[i] >= 0.0 && alpha_grid[i] <= 1.0)) {
      throw Error(ErrorCode::kInvalidAlpha, "grid values must lie in [0, 1]");
    }
    if (i > 0 && !(alpha_grid[i] > alpha_grid[i - 1])) {
      throw Error(ErrorCode::kInvalidConfig, "alpha grid must be strictly increasing");
    }
  }
  if (top_k == 0) throw Error(ErrorCode::kInvalidConfig, "top_k must be >= 1");
  if (!(ce_std_floor >= 0.0)) throw Error(ErrorCode::kInvalidConfig, "ce_std_floor must be >= 0");
}

nlohmann::json FusionConfig::to_json() const {
  return {{"alpha", alpha},
          {"dynamic", dynamic},
          {"dynamic_gate", "alpha_used = alpha * (1 - clamp((s1 - s2) / max(s1, 1e-12), 0, 1))"},
          {"alpha_grid", alpha_grid},
          {"rrf_k", rrf_k},
          {"top_k", top_k},
          {"ce_std_floor", ce_std_floor},
          {"dual", to_string(dual)}};
}

std::vector<double> min_max(std::span<const double> x) {
  std::vector<double> out(x.size(), 0.5);
  if (x.empty()) return out;
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  const double range = *hi - *lo;
  if (!(range > 0.0)) return out;
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - *lo) / range;
  return out;
}

CandidateSet candidate_union(std::string qid, const Ranking& bm25, const Ranking& embed) {
  if (bm25.empty() && embed.empty()) {
    throw Error(ErrorCode::kEmptyCandidates, "query " + qid + " has no candidates");
  }
  std::map<std::string, Candidate> merged;
  for (const auto& s : bm25) {
    auto& c = merged[s.id];
    c.id = s.id;
    c.bm25_raw = s.score;
    c.from_bm25 = true;
  }
  for (const auto& s : embed) {
    auto& c = merged[s.id];
    c.id = s.id;
    c.embed_raw = s.score;
    c.from_embed = true;
  }
  auto source_min = [](const Ranking& r) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& s : r) m = std::min(m, s.score);
    return r.empty() ? 0.0 : m;
  };
  const double bm25_min = source_min(bm25);
  const double embed_min = source_min(embed);

  CandidateSet set;
  set.qid = std::move(qid);
  std::vector<double> b, e;
  for (auto& [id, c] : merged) {
    if (!c.from_bm25) c.bm25_raw = bm25_min;
    if (!c.from_embed) c.embed_raw = embed_min;
    b.push_back(c.bm25_raw);
    e.push_back(c.embed_raw);
    set.entries.push_back(c);
  }
  const auto bn = min_max(b);
  const auto en = min_max(e);
  for (std::size_t i = 0; i < set.entries.size(); ++i) {
    set.entries[i].bm25_norm = bn[i];
    set.entries[i].embed_norm = en[i];
  }
  return set;
}

Ranking interpolate(const CandidateSet& cands, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::kInvalidAlpha, "alpha must lie in [0, 1]");
  }
  Ranking out;
  out.reserve(cands.entries.size());
  for (const auto& c : cands.entries) {
    out.push_back({c.id, alpha * c.embed_norm + (1.0 - alpha) * c.bm25_norm});
  }
  sort_ranking(out);
  return out;
}

DynamicAlpha dynamic_alpha(const CandidateSet& cands, double base_alpha, double eps) {
  if (!(base_alpha >= 0.0 && base_alpha <= 1.0)) {
    throw Error(ErrorCode::kInvalidAlpha, "alpha must lie in [0, 1]");
  }
  std::vector<double> raw;
  for (const auto& c : cands.entries)
    if (c.from_bm25) raw.push_back(c.bm25_raw);
  std::sort(raw.begin(), raw.end(), std::greater<>());
  DynamicAlpha out;
  if (raw.empty()) {
    out.margin = 0.0;
  } else if (raw.size() == 1) {
    out.margin = 1.0;
  } else {
    out.margin = (raw[0] - raw[1]) / std::max(raw[0], eps);
  }
  out.alpha_used = base_alpha * (1.0 - std::clamp(out.margin, 0.0, 1.0));
  out.ranking = interpolate(cands, out.alpha_used);
  return out;
}

Ranking rrf(std::span<const Ranking> lists, std::size_t k) {
  std::map<std::string, double> score;
  for (const auto& list : lists) {
    for (std::size_t i = 0; i < list.size(); ++i) {
      score[list[i].id] += 1.0 / static_cast<double>(k + i + 1);
    }
  }
  Ranking out;
  out.reserve(score.size());
  for (const auto& [id, s] : score) out.push_back({id, s});
  sort_ranking(out);
  return out;
}

nlohmann::json OracleResult::to_json() const {
  nlohmann::json per_query = nlohmann::json::array();
  for (const auto& q : queries) {
    per_query.push_back({{"qid", q.qid},
                         {"best_alpha", q.best_alpha},
                         {"best_metric", q.best_metric},
                         {"per_alpha", q.per_alpha}});
  }
  nlohmann::json fixed = nlohmann::json::array();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    fixed.push_back({{"alpha", grid[i]}, {"metric", fixed_alpha_aggregate[i]}});
  }
  return {{"grid", grid}, {"aggregate", aggregate}, {"fixed_alpha", fixed}, {"queries", per_query}};
}

OracleResult alpha_oracle(std::span<const CandidateSet> sets, std::span<const double> grid,
                          const std::map<std::string, std::string>& relevant,
                          OracleMetric metric) {
  if (grid.empty()) throw Error(ErrorCode::kInvalidConfig, "alpha grid is empty");
  OracleResult result;
  result.grid.assign(grid.begin(), grid.end());
  result.fixed_alpha_aggregate.assign(grid.size(), 0.0);
  for (const auto& set : sets) {
    auto rel = relevant.find(set.qid);
    if (rel == relevant.end()) {
      throw Error(ErrorCode::kMissingRanking, "no judgment for query " + set.qid);
    }
    OracleQuery q;
    q.qid = set.qid;
    q.best_metric = -1.0;
    for (double alpha : grid) {
      const auto ids = ids_of(interpolate(set, alpha));
      const std::size_t rank = rank_of(ids, rel->second);
      const double m = metric == OracleMetric::kReciprocalRank ? reciprocal_rank(rank)
                                                               : ndcg_single(rank);
      q.per_alpha.push_back(m);
      if (m > q.best_metric) {
        q.best_metric = m;
        q.best_alpha = alpha;
      }
    }
    for (std::size_t i = 0; i < grid.size(); ++i) result.fixed_alpha_aggregate[i] += q.per_alpha[i];
    result.aggregate += q.best_metric;
    result.queries.push_back(std::move(q));
  }
  if (!result.queries.empty()) {
    const double n = static_cast<double>(result.queries.size());
    result.aggregate /= n;
    for (double& v : result.fixed_alpha_aggregate) v /= n;
  }
  return result;
}

void CeScores::set(const std::string& qid, const std::string& unit, double score) {
  scores_[{qid, unit}] = score;
}

std::optional<double> CeScores::get(const std::string& qid, const std::string& unit) const {
  auto it = scores_.find({qid, unit});
  if (it == scores_.end()) return std::nullopt;
  return it->second;
}

CeScores CeScores::read_tsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  CeScores ce;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos || line.find('\t', t2 + 1) != std::string::npos) {
      throw Error(ErrorCode::kParse, where + ": expected qid, unit_id, score");
    }
    double score = 0.0;
    try {
      std::size_t used = 0;
      const std::string field = line.substr(t2 + 1);
      score = std::stod(field, &used);
      if (used != field.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw Error(ErrorCode::kParse, where + ": bad score");
    }
    if (!std::isfinite(score)) throw Error(ErrorCode::kParse, where + ": score not finite");
    ce.set(line.substr(0, t1), line.substr(t1 + 1, t2 - t1 - 1), score);
  }
  return ce;
}

CeOutcome ce_rerank(const Ranking& ranked, const std::string& qid, const CeScores& ce,
                    std::size_t top_k, double std_floor) {
  CeOutcome out;
  out.ranking = ranked;
  const std::size_t k = std::min(top_k, ranked.size());
  if (k == 0) {
    out.reason = "empty";
    return out;
  }
  std::vector<std::size_t> covered;
  std::vector<double> ce_vals, base_vals;
  for (std::size_t i = 0; i < k; ++i) {
    if (auto s = ce.get(qid, ranked[i].id)) {
      covered.push_back(i);
      ce_vals.push_back(*s);
      base_vals.push_back(ranked[i].score);
    }
  }
  out.coverage = static_cast<double>(covered.size()) / static_cast<double>(k);
  if (out.coverage < 0.8) {
    out.reason = "missing_scores";
    return out;
  }
  const double n = static_cast<double>(ce_vals.size());
  const double mean = std::accumulate(ce_vals.begin(), ce_vals.end(), 0.0) / n;
  double var = 0.0;
  for (double v : ce_vals) var += (v - mean) * (v - mean);
  out.ce_std = std::sqrt(var / n);
  if (*out.ce_std <= std_floor) {
    out.reason = "degenerate";
    return out;
  }
  try {
    out.spearman = spearman(ce_vals, base_vals);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kUndefined) throw;
    out.reason = "undefined_correlation";
    return out;
  }
  if (*out.spearman < 0.0) {
    out.reason = "negative_correlation";
    return out;
  }

  std::vector<std::size_t> order(covered);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return *ce.get(qid, ranked[a].id) > *ce.get(qid, ranked[b].id);
  });
  std::vector<char> is_covered(k, 0);
  for (std::size_t i : covered) is_covered[i] = 1;
  for (std::size_t i = 0; i < k; ++i)
    if (!is_covered[i]) order.push_back(i);
  for (std::size_t pos = 0; pos < k; ++pos) out.ranking[pos] = ranked[order[pos]];
  out.applied = true;
  out.reason = "applied";
  return out;
}

Ranking dual_channel(const Ranking& current, const Ranking& amp, DualMode mode,
                     std::size_t rrf_k) {
  if (mode == DualMode::kOff) return current;
  if (mode == DualMode::kRrf) {
    const Ranking lists[] = {current, amp};
    return rrf(lists, rrf_k);
  }
  std::map<std::string, double> sum;
  for (const Ranking* list : {&current, &amp}) {
    std::vector<double> raw;
    for (const auto& s : *list) raw.push_back(s.score);
    const auto norm = min_max(raw);
    for (std::size_t i = 0; i < list->size(); ++i) sum[(*list)[i].id] += norm[i];
  }
  Ranking out;
  for (const auto& [id, s] : sum) out.push_back({id, s / 2.0});
  sort_ranking(out);
  return out;
}

}  // namespace qwb
