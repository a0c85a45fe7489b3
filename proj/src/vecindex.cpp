// Copyright 2026 The qwbench Authors
// SPDX-License-Identifier: Apache-2.0

#include "qwb/vecindex.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "qwb/error.hpp"

namespace qwb {

bool channels_compatible(Channel a, Channel b) {
  if (a == b) return true;
  auto teacher_space = [](Channel c) { return c == Channel::kTeacher || c == Channel::kDistilled; };
  return teacher_space(a) && teacher_space(b);
}

VecIndex VecIndex::build(std::span<const Embedding> rows, std::string fingerprint) {
  VecIndex index;
  index.fingerprint_ = std::move(fingerprint);
  if (rows.empty()) return index;
  index.dim_ = rows.front().vec.size();
  index.channel_ = rows.front().channel;
  std::set<std::string> seen;
  index.data_.reserve(rows.size() * index.dim_);
  for (const auto& r : rows) {
    if (!seen.insert(r.owner_id).second) {
      throw Error(ErrorCode::kInvalidConfig, "duplicate id in vector index: " + r.owner_id);
    }
    if (r.vec.size() != index.dim_) {
      throw Error(ErrorCode::kDimensionMismatch, "mixed dimensions in vector index");
    }
    if (r.channel != index.channel_) {
      throw Error(ErrorCode::kInvalidConfig, "mixed channels in vector index");
    }
    double norm2 = 0.0;
    for (double x : r.vec) norm2 += x * x;
    if (std::abs(std::sqrt(norm2) - 1.0) > 1e-6) {
      throw Error(ErrorCode::kZeroVector, "row " + r.owner_id + " is not unit norm");
    }
    index.ids_.push_back(r.owner_id);
    index.data_.insert(index.data_.end(), r.vec.begin(), r.vec.end());
  }
  return index;
}

Ranking VecIndex::search(const Embedding& q, std::size_t top_k) const {
  if (!channels_compatible(q.channel, channel_)) {
    throw Error(ErrorCode::kChannelMismatch, "query channel " + std::string(to_string(q.channel)) +
                                                 " vs index channel " +
                                                 std::string(to_string(channel_)));
  }
  if (!ids_.empty() && q.vec.size() != dim_) {
    throw Error(ErrorCode::kDimensionMismatch, "query dimension differs from index");
  }
  Ranking out;
  out.reserve(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    out.push_back({ids_[i], std::clamp(dot(q.vec, row(i)), -1.0, 1.0)});
  }
  truncate_ranking(out, top_k);
  return out;
}

std::string_view to_string(DocAggregation agg) {
  return agg == DocAggregation::kMax ? "max" : "mean";
}

DocAggregation doc_aggregation_from_string(std::string_view name) {
  if (name == "max") return DocAggregation::kMax;
  if (name == "mean") return DocAggregation::kMean;
  throw Error(ErrorCode::kInvalidConfig, "unknown aggregation: " + std::string(name));
}

Ranking doc_score_from_subchunks(const VecIndex& index, const Embedding& q,
                                 const std::map<std::string, std::string>& doc_of,
                                 DocAggregation agg, std::size_t top_k) {
  struct Acc {
    double best = -2.0;
    double sum = 0.0;
    std::size_t n = 0;
  };
  std::map<std::string, Acc> per_doc;
  for (const auto& hit : index.search(q)) {
    auto it = doc_of.find(hit.id);
    if (it == doc_of.end()) {
      throw Error(ErrorCode::kMappingError, "sub-chunk " + hit.id + " has no document");
    }
    auto& a = per_doc[it->second];
    a.best = std::max(a.best, hit.score);
    a.sum += hit.score;
    ++a.n;
  }
  Ranking out;
  for (const auto& [doc, a] : per_doc) {
    out.push_back({doc, agg == DocAggregation::kMax ? a.best : a.sum / static_cast<double>(a.n)});
  }
  truncate_ranking(out, top_k);
  return out;
}

}  // namespace qwb
