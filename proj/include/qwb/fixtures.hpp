// Copyright 2026 The qwbench Authors
// SPDX-License-Identifier: Apache-2.0

// Deterministic synthetic data: a topical corpus with judged queries, a
// sentence-pair set in three similarity regimes, and planted "teacher"
// vectors whose pair cosines equal the reference scores.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "qwb/corpus.hpp"
#include "qwb/embed.hpp"
#include "qwb/evalkit.hpp"

namespace qwb {

struct FixtureOptions {
  std::size_t n_docs = 10;
  std::size_t doc_tokens = 1000;
  std::size_t queries_per_doc = 3;
  std::size_t query_tokens = 8;
  std::size_t pairs_per_regime = 20;
  std::size_t sentence_tokens = 12;
  std::size_t teacher_dim = kEmbeddingDim;
  std::uint64_t seed = 7;
};

struct Fixture {
  std::vector<Document> docs;
  std::vector<Query> queries;
  std::vector<PairRecord> pairs;
  /// Two records per pair, ids from pair_sentence_id().
  std::vector<Embedding> teacher;
};

Fixture make_fixture(const FixtureOptions& opts = {});

/// "p<line>a" / "p<line>b" for the 1-based TSV line of a pair.
std::string pair_sentence_id(std::size_t line, bool second);

/// corpus.jsonl, queries.jsonl, pairs.tsv and teacher_pairs.jsonl.
void write_fixture(const std::filesystem::path& dir, const Fixture& fixture);

}  // namespace qwb
