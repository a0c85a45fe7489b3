// Copyright 2026 The qwbench Authors
// SPDX-License-Identifier: Apache-2.0

#include "qwb/lexindex.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "binio.hpp"
#include "json.hpp"
#include "qwb/error.hpp"

namespace qwb {

namespace {
constexpr char kBm25Magic[9] = "QWBBM251";
}

Bm25Index Bm25Index::build(std::vector<IndexUnit> units, Bm25Params params) {
  if (units.empty()) throw Error(ErrorCode::kEmptyCorpus, "no units to index");
  if (!(params.k1 >= 0.0) || !(params.b >= 0.0 && params.b <= 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "BM25 needs k1 >= 0 and b in [0, 1]");
  }
  std::sort(units.begin(), units.end(),
            [](const IndexUnit& a, const IndexUnit& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < units.size(); ++i) {
    if (units[i].id == units[i - 1].id) {
      throw Error(ErrorCode::kInvalidConfig, "duplicate unit id: " + units[i].id);
    }
  }
  Bm25Index index;
  index.params_ = params;
  std::uint64_t total = 0;
  for (std::size_t u = 0; u < units.size(); ++u) {
    index.ids_.push_back(units[u].id);
    index.lengths_.push_back(static_cast<std::uint32_t>(units[u].tokens.size()));
    total += units[u].tokens.size();
    std::map<std::string, std::uint32_t> counts;
    for (const auto& t : units[u].tokens) ++counts[t];
    for (const auto& [term, tf] : counts) {
      index.postings_[term].push_back({static_cast<std::uint32_t>(u), tf});
    }
  }
  index.avg_len_ = static_cast<double>(total) / static_cast<double>(units.size());
  if (!(index.avg_len_ > 0.0)) {
    throw Error(ErrorCode::kEmptyCorpus, "all indexed units are empty");
  }
  return index;
}

std::size_t Bm25Index::df(const std::string& term) const {
  auto it = postings_.find(term);
  return it == postings_.end() ? 0 : it->second.size();
}

double Bm25Index::idf(const std::string& term) const {
  const double n = static_cast<double>(ids_.size());
  const double d = static_cast<double>(df(term));
  return std::log(1.0 + (n - d + 0.5) / (d + 0.5));
}

std::uint32_t Bm25Index::tf(const std::string& term, const std::string& id) const {
  auto it = postings_.find(term);
  if (it == postings_.end()) return 0;
  auto pos = std::lower_bound(ids_.begin(), ids_.end(), id);
  if (pos == ids_.end() || *pos != id) return 0;
  const auto u = static_cast<std::uint32_t>(pos - ids_.begin());
  auto p = std::lower_bound(it->second.begin(), it->second.end(), u,
                            [](const Posting& a, std::uint32_t v) { return a.unit < v; });
  return (p != it->second.end() && p->unit == u) ? p->tf : 0;
}

Ranking Bm25Index::score(std::span<const std::string> query, std::size_t top_k) const {
  const std::set<std::string> terms(query.begin(), query.end());
  std::vector<double> acc(ids_.size(), 0.0);
  std::vector<char> matched(ids_.size(), 0);
  const double k1 = params_.k1, b = params_.b;
  for (const auto& term : terms) {
    auto it = postings_.find(term);
    if (it == postings_.end()) continue;
    const double w = idf(term);
    for (const auto& p : it->second) {
      const double tf = static_cast<double>(p.tf);
      const double norm = k1 * (1.0 - b + b * static_cast<double>(lengths_[p.unit]) / avg_len_);
      acc[p.unit] += w * tf * (k1 + 1.0) / (tf + norm);
      matched[p.unit] = 1;
    }
  }
  Ranking out;
  for (std::size_t u = 0; u < ids_.size(); ++u) {
    if (matched[u]) out.push_back({ids_[u], acc[u]});
  }
  truncate_ranking(out, top_k);
  return out;
}

void Bm25Index::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  const nlohmann::json header{{"format", "qwb-bm25"},
                              {"N", ids_.size()},
                              {"k1", params_.k1},
                              {"b", params_.b},
                              {"avg_length", avg_len_},
                              {"terms", postings_.size()}};
  out << header.dump() << '\n';
  binio::put_magic(out, kBm25Magic);
  binio::put<double>(out, params_.k1);
  binio::put<double>(out, params_.b);
  binio::put<double>(out, avg_len_);
  binio::put<std::uint64_t>(out, ids_.size());
  for (std::size_t u = 0; u < ids_.size(); ++u) {
    binio::put_string(out, ids_[u]);
    binio::put<std::uint32_t>(out, lengths_[u]);
  }
  std::vector<const std::string*> terms;
  terms.reserve(postings_.size());
  for (const auto& kv : postings_) terms.push_back(&kv.first);
  std::sort(terms.begin(), terms.end(),
            [](const std::string* a, const std::string* b) { return *a < *b; });
  binio::put<std::uint64_t>(out, terms.size());
  for (const std::string* t : terms) {
    const auto& list = postings_.at(*t);
    binio::put_string(out, *t);
    binio::put<std::uint32_t>(out, static_cast<std::uint32_t>(list.size()));
    for (const auto& p : list) {
      binio::put<std::uint32_t>(out, p.unit);
      binio::put<std::uint32_t>(out, p.tf);
    }
  }
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

Bm25Index Bm25Index::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::string header;
  std::getline(in, header);
  if (nlohmann::json::parse(header, nullptr, false).is_discarded()) {
    throw Error(ErrorCode::kParse, "bad BM25 index header in " + path.string());
  }
  binio::expect_magic(in, kBm25Magic);
  Bm25Index index;
  index.params_.k1 = binio::get<double>(in);
  index.params_.b = binio::get<double>(in);
  index.avg_len_ = binio::get<double>(in);
  const auto n = binio::get<std::uint64_t>(in);
  for (std::uint64_t u = 0; u < n; ++u) {
    index.ids_.push_back(binio::get_string(in));
    index.lengths_.push_back(binio::get<std::uint32_t>(in));
  }
  const auto n_terms = binio::get<std::uint64_t>(in);
  for (std::uint64_t t = 0; t < n_terms; ++t) {
    std::string term = binio::get_string(in);
    const auto count = binio::get<std::uint32_t>(in);
    std::vector<Posting> list(count);
    for (auto& p : list) {
      p.unit = binio::get<std::uint32_t>(in);
      p.tf = binio::get<std::uint32_t>(in);
      if (p.unit >= n) throw Error(ErrorCode::kParse, "posting refers to unknown unit");
    }
    index.postings_.emplace(std::move(term), std::move(list));
  }
  return index;
}

}  // namespace qwb
