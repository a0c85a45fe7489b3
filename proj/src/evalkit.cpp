// Copyright 2026 The qwbench Authors
// SPDX-License-Identifier: Apache-2.0

#include "qwb/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "qwb/error.hpp"

namespace qwb {

std::size_t rank_of(std::span<const std::string> ranked, const std::string& relevant) {
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    if (ranked[i] == relevant) return i + 1;
  }
  return 0;
}

double reciprocal_rank(std::size_t rank, std::size_t cutoff) {
  return (rank >= 1 && rank <= cutoff) ? 1.0 / static_cast<double>(rank) : 0.0;
}

double ndcg_single(std::size_t rank, std::size_t cutoff) {
  return (rank >= 1 && rank <= cutoff) ? 1.0 / std::log2(static_cast<double>(rank) + 1.0) : 0.0;
}

nlohmann::json MetricsReport::to_json() const {
  nlohmann::json j;
  j["method"] = method;
  nlohmann::json hits = nlohmann::json::object();
  for (std::size_t i = 0; i < k_list.size(); ++i) hits["hit@" + std::to_string(k_list[i])] = hit[i];
  j["hit"] = hits;
  j["mrr@10"] = mrr;
  j["ndcg@10"] = ndcg;
  j["map@10"] = map;
  j["n_queries"] = per_query.size();
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& q : per_query) {
    rows.push_back({{"qid", q.qid},
                    {"relevant", q.relevant},
                    {"rank", q.rank == 0 ? nlohmann::json(nullptr) : nlohmann::json(q.rank)},
                    {"rr", q.rr},
                    {"ndcg", q.ndcg},
                    {"ap", q.ap}});
  }
  j["per_query"] = rows;
  return j;
}

MetricsReport retrieval_metrics(const std::map<std::string, std::vector<std::string>>& rankings,
                                std::span<const QueryJudgment> judgments,
                                std::span<const std::size_t> k_list, std::string method) {
  MetricsReport report;
  report.method = std::move(method);
  report.k_list.assign(k_list.begin(), k_list.end());
  report.hit.assign(k_list.size(), 0.0);
  for (const auto& j : judgments) {
    auto it = rankings.find(j.qid);
    if (it == rankings.end()) {
      throw Error(ErrorCode::kMissingRanking, "no ranking for query " + j.qid);
    }
    QueryMetrics q;
    q.qid = j.qid;
    q.relevant = j.relevant;
    q.rank = rank_of(it->second, j.relevant);
    for (std::size_t k : k_list) q.hit.push_back(q.rank >= 1 && q.rank <= k ? 1.0 : 0.0);
    q.rr = reciprocal_rank(q.rank);
    q.ndcg = ndcg_single(q.rank);
    // With one relevant unit, AP@10 is the precision at its rank.
    q.ap = q.rr;
    report.per_query.push_back(std::move(q));
  }
  const double n = static_cast<double>(report.per_query.size());
  if (n > 0) {
    for (const auto& q : report.per_query) {
      for (std::size_t i = 0; i < q.hit.size(); ++i) report.hit[i] += q.hit[i];
      report.mrr += q.rr;
      report.ndcg += q.ndcg;
      report.map += q.ap;
    }
    for (double& h : report.hit) h /= n;
    report.mrr /= n;
    report.ndcg /= n;
    report.map /= n;
  }
  return report;
}

MetricsReport retrieval_metrics(const std::map<std::string, std::vector<std::string>>& rankings,
                                std::span<const QueryJudgment> judgments, std::string method) {
  static constexpr std::size_t kDefaultK[] = {1, 3, 5, 10};
  return retrieval_metrics(rankings, judgments, kDefaultK, std::move(method));
}

std::string markdown_table(std::span<const MetricsReport> reports) {
  std::ostringstream out;
  out << "| Method | H@1 | H@3 | H@5 | H@10 | nDCG | MRR | MAP |\n";
  out << "|---|---|---|---|---|---|---|---|\n";
  auto cell = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return std::string(buf);
  };
  for (const auto& r : reports) {
    auto hit_at = [&](std::size_t k) {
      for (std::size_t i = 0; i < r.k_list.size(); ++i)
        if (r.k_list[i] == k) return cell(r.hit[i]);
      return std::string("-");
    };
    out << "| " << r.method << " | " << hit_at(1) << " | " << hit_at(3) << " | " << hit_at(5)
        << " | " << hit_at(10) << " | " << cell(r.ndcg) << " | " << cell(r.mrr) << " | "
        << cell(r.map) << " |\n";
  }
  return out.str();
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "pearson: inputs differ in length");
  }
  if (x.size() < 2) throw Error(ErrorCode::kUndefined, "pearson: need at least 2 points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  // Rounding in the mean leaves residue of order eps*|x| on constant inputs.
  auto flat = [n](double ss, std::span<const double> v) {
    double scale = 0.0;
    for (double e : v) scale = std::max(scale, std::abs(e));
    const double tol = 64.0 * std::numeric_limits<double>::epsilon() * scale;
    return !(ss > n * tol * tol);
  };
  if (flat(sxx, x) || flat(syy, y)) {
    throw Error(ErrorCode::kUndefined, "pearson: zero variance");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double mean_rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mean_rank;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "spearman: inputs differ in length");
  }
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  try {
    return pearson(rx, ry);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kUndefined) {
      throw Error(ErrorCode::kUndefined, "spearman: zero rank variance");
    }
    throw;
  }
}

double Histogram::bin_left(std::size_t i) const {
  return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(counts.size());
}

std::size_t Histogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

double Histogram::mass_from(double x) const {
  const std::size_t t = total();
  if (t == 0) return 0.0;
  std::size_t above = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (bin_left(i) >= x) above += counts[i];
  }
  return static_cast<double>(above) / static_cast<double>(t);
}

nlohmann::json Histogram::to_json() const {
  return {{"lo", lo}, {"hi", hi}, {"bins", counts.size()}, {"counts", counts}};
}

Histogram make_histogram(std::span<const double> values, std::size_t bins, double lo,
                         double hi) {
  if (bins == 0 || !(hi > lo)) throw Error(ErrorCode::kInvalidConfig, "bad histogram range");
  Histogram h;
  h.lo = lo;
  h.hi = hi;
  h.counts.assign(bins, 0);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (double v : values) {
    auto idx = static_cast<std::ptrdiff_t>(std::floor((v - lo) / width));
    idx = std::clamp<std::ptrdiff_t>(idx, 0, static_cast<std::ptrdiff_t>(bins) - 1);
    ++h.counts[static_cast<std::size_t>(idx)];
  }
  return h;
}

void write_histogram_csv(const std::filesystem::path& path, const Histogram& h) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << "bin_left,count\n";
  char buf[64];
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.4f,%zu\n", h.bin_left(i), h.counts[i]);
    out << buf;
  }
}

std::string_view to_string(Regime regime) {
  switch (regime) {
    case Regime::kSim: return "sim";
    case Regime::kNeutral: return "neutral";
    case Regime::kDissim: return "dissim";
  }
  return "neutral";
}

Regime regime_from_string(std::string_view name) {
  if (name == "sim") return Regime::kSim;
  if (name == "neutral") return Regime::kNeutral;
  if (name == "dissim") return Regime::kDissim;
  throw Error(ErrorCode::kParse, "unknown regime: " + std::string(name));
}

std::vector<PairRecord> read_pairs_tsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<PairRecord> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<std::string> cols;
    std::size_t start = 0;
    for (;;) {
      const auto tab = line.find('\t', start);
      cols.push_back(line.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (cols.size() != 4) {
      throw Error(ErrorCode::kParse, where + ": expected 4 tab-separated columns");
    }
    PairRecord p;
    p.a = cols[0];
    p.b = cols[1];
    try {
      std::size_t used = 0;
      p.score = std::stod(cols[2], &used);
      if (used != cols[2].size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw Error(ErrorCode::kParse, where + ": bad score '" + cols[2] + "'");
    }
    if (!std::isfinite(p.score)) throw Error(ErrorCode::kParse, where + ": score not finite");
    try {
      p.regime = regime_from_string(cols[3]);
    } catch (const Error& e) {
      throw Error(ErrorCode::kParse, where + ": " + e.what());
    }
    pairs.push_back(std::move(p));
  }
  return pairs;
}

void write_pairs_tsv(const std::filesystem::path& path, std::span<const PairRecord> pairs) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  char buf[32];
  for (const auto& p : pairs) {
    std::snprintf(buf, sizeof buf, "%.6f", p.score);
    out << p.a << '\t' << p.b << '\t' << buf << '\t' << to_string(p.regime) << '\n';
  }
}

nlohmann::json PairwiseReport::to_json() const {
  auto opt = [](const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  nlohmann::json regs = nlohmann::json::object();
  for (const auto& [name, s] : regimes) {
    regs[name] = {{"n", s.n}, {"mean_sim", s.mean_sim}, {"mean_ref", s.mean_ref}, {"mae", s.mae}};
  }
  return {{"n", n},
          {"pearson", opt(pearson)},
          {"spearman", opt(spearman)},
          {"mae", mae},
          {"mean_sim", mean_sim},
          {"regimes", regs},
          {"histogram", histogram.to_json()},
          {"note",
           "MAE compares cosine in [-1,1] with reference scores in [0,1]; the scales differ"}};
}

PairwiseReport pairwise_report(std::span<const double> cosines,
                               std::span<const PairRecord> pairs) {
  if (cosines.size() != pairs.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "one cosine per pair required");
  }
  if (pairs.size() < 2) throw Error(ErrorCode::kUndefined, "need at least 2 pairs");
  PairwiseReport r;
  r.n = pairs.size();
  std::vector<double> refs;
  refs.reserve(pairs.size());
  for (const auto& p : pairs) refs.push_back(p.score);
  try {
    r.pearson = pearson(cosines, refs);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kUndefined) throw;
  }
  try {
    r.spearman = spearman(cosines, refs);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kUndefined) throw;
  }
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    r.mae += std::abs(cosines[i] - refs[i]);
    r.mean_sim += cosines[i];
    auto& s = r.regimes[std::string(to_string(pairs[i].regime))];
    ++s.n;
    s.mean_sim += cosines[i];
    s.mean_ref += refs[i];
    s.mae += std::abs(cosines[i] - refs[i]);
  }
  r.mae /= static_cast<double>(r.n);
  r.mean_sim /= static_cast<double>(r.n);
  for (auto& [name, s] : r.regimes) {
    const double k = static_cast<double>(s.n);
    s.mean_sim /= k;
    s.mean_ref /= k;
    s.mae /= k;
  }
  r.histogram = make_histogram(cosines);
  return r;
}

}  // namespace qwb
