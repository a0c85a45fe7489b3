// Copyright 2026 The qwbench Authors
// SPDX-License-Identifier: Apache-2.0

// Okapi BM25 over an in-memory inverted index.

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "qwb/corpus.hpp"
#include "qwb/ranking.hpp"

namespace qwb {

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

struct Posting {
  std::uint32_t unit = 0;  // index into ids(), which are sorted
  std::uint32_t tf = 0;
};

struct IndexUnit {
  std::string id;
  std::vector<std::string> tokens;
};

class Bm25Index {
 public:
  /// Throws Error(kEmptyCorpus) for no units, Error(kInvalidConfig) for
  /// duplicate ids or invalid parameters.
  static Bm25Index build(std::vector<IndexUnit> units, Bm25Params params = {});

  /// Ranked units sharing at least one term with the query; repeated query
  /// terms count once. top_k == 0 returns every match.
  Ranking score(std::span<const std::string> query, std::size_t top_k = 0) const;

  double idf(const std::string& term) const;
  std::size_t df(const std::string& term) const;
  std::uint32_t tf(const std::string& term, const std::string& id) const;

  std::size_t size() const { return ids_.size(); }
  double avg_length() const { return avg_len_; }
  const Bm25Params& params() const { return params_; }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::vector<std::uint32_t>& lengths() const { return lengths_; }
  const std::unordered_map<std::string, std::vector<Posting>>& postings() const {
    return postings_;
  }

  /// Binary file preceded by a one-line JSON header (N, k1, b, avg length).
  void save(const std::filesystem::path& path) const;
  static Bm25Index load(const std::filesystem::path& path);

 private:
  Bm25Params params_;
  std::vector<std::string> ids_;
  std::vector<std::uint32_t> lengths_;
  double avg_len_ = 0.0;
  std::unordered_map<std::string, std::vector<Posting>> postings_;
};

}  // namespace qwb
