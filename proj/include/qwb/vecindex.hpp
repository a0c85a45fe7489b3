// Copyright 2026 The qwbench Authors
// SPDX-License-Identifier: Apache-2.0

// Exact inner-product search over unit-norm embeddings.

#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "qwb/embed.hpp"
#include "qwb/ranking.hpp"

namespace qwb {

/// Channels whose vectors live in the same space. Distilled student
/// vectors are comparable with teacher vectors.
bool channels_compatible(Channel a, Channel b);

class VecIndex {
 public:
  /// Throws Error(kInvalidConfig) for duplicate ids or mixed channels,
  /// Error(kDimensionMismatch) for mixed dimensions and Error(kZeroVector)
  /// for rows more than 1e-6 away from unit norm.
  static VecIndex build(std::span<const Embedding> rows, std::string fingerprint = {});

  /// Scores clamped to [-1, 1]; top_k == 0 returns every row. Throws
  /// Error(kChannelMismatch) or Error(kDimensionMismatch).
  Ranking search(const Embedding& q, std::size_t top_k = 0) const;

  std::size_t size() const { return ids_.size(); }
  std::size_t dim() const { return dim_; }
  Channel channel() const { return channel_; }
  const std::string& fingerprint() const { return fingerprint_; }
  const std::vector<std::string>& ids() const { return ids_; }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }

 private:
  std::vector<std::string> ids_;
  std::vector<double> data_;  // row-major
  std::size_t dim_ = 0;
  Channel channel_ = Channel::kCurrent;
  std::string fingerprint_;
};

enum class DocAggregation { kMax, kMean };

std::string_view to_string(DocAggregation agg);
DocAggregation doc_aggregation_from_string(std::string_view name);

/// Per-document scores from a sub-chunk index. `doc_of` maps every sub id in
/// the index to its document; an unmapped id throws Error(kMappingError).
Ranking doc_score_from_subchunks(const VecIndex& index, const Embedding& q,
                                 const std::map<std::string, std::string>& doc_of,
                                 DocAggregation agg = DocAggregation::kMax,
                                 std::size_t top_k = 0);

}  // namespace qwb
