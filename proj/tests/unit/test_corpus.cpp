// Copyright 2026 The qwbench Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <tuple>

#include "qwb/corpus.hpp"
#include "qwb/error.hpp"

namespace qwb {
namespace {

std::string words(std::size_t n) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s += "w" + std::to_string(i) + " ";
  return s;
}

TEST(Tokenize, LowercasesAndStripsPunctuation) {
  const auto t = tokenize("La Corte di Cassazione.");
  EXPECT_EQ(t.tokens, (std::vector<std::string>{"la", "corte", "di", "cassazione"}));
}

TEST(Tokenize, EmptyTextIsAnError) {
  try {
    tokenize("");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyText);
  }
  EXPECT_THROW(tokenize(" ,;. "), Error);
}

TEST(Tokenize, OffsetsReconstructTokens) {
  const std::string text = "Èl perché, ÀNCORA über-naïve 42 test";
  const auto t = tokenize(text);
  ASSERT_EQ(t.tokens.size(), t.offsets.size());
  std::size_t prev_end = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto& s = t.offsets[i];
    EXPECT_GE(s.begin, prev_end);
    EXPECT_LT(s.begin, s.end);
    prev_end = s.end;
    const auto raw = tokenize(text.substr(s.begin, s.size()));
    ASSERT_EQ(raw.size(), 1u);
    EXPECT_EQ(raw.tokens[0], t.tokens[i]);
  }
}

TEST(Tokenize, Deterministic) {
  const std::string text = words(300);
  EXPECT_EQ(tokenize(text).tokens, tokenize(text).tokens);
}

TEST(Segment, ChunkStartsFollowOverlapStep) {
  SegmentationConfig cfg;
  const auto doc = segment({"d", words(1000), "en"}, cfg);
  std::vector<std::size_t> starts;
  for (const auto& c : doc.chunks) starts.push_back(c.doc_span.begin);
  // The 40-token tail piece at 960 is under a quarter of 384 and lies inside
  // the piece starting at 640, which already reaches the end.
  EXPECT_EQ(starts, (std::vector<std::size_t>{0, 320, 640}));
  EXPECT_EQ(doc.chunks.back().doc_span.end, 1000u);
  for (std::size_t i = 1; i < doc.chunks.size(); ++i) {
    EXPECT_EQ(doc.chunks[i - 1].doc_span.end - doc.chunks[i].doc_span.begin, cfg.chunk_overlap);
  }
}

TEST(Segment, ShortDocumentYieldsOneSubChunk) {
  const auto doc = segment({"d", words(100), "en"}, SegmentationConfig{});
  ASSERT_EQ(doc.subchunks.size(), 1u);
  EXPECT_EQ(doc.subchunks[0].tokens.size(), 100u);
}

TEST(Segment, TwoPhasePassIsShifted) {
  SegmentationConfig cfg;
  cfg.two_phase_shift = 8;
  const auto doc = segment({"d", words(1000), "en"}, cfg);
  std::map<std::string, std::size_t> base;
  for (const auto& s : doc.subchunks)
    if (s.role == SubChunkRole::kBase) base[s.chunk_id + s.sub_id.substr(s.sub_id.rfind('#') + 2)] = s.token_span.begin;
  std::size_t phases = 0;
  for (const auto& s : doc.subchunks) {
    if (s.role != SubChunkRole::kPhase) continue;
    ++phases;
    EXPECT_EQ(s.phase_shift, 8u);
    EXPECT_EQ(s.token_span.begin, base.at(s.chunk_id + s.sub_id.substr(s.sub_id.rfind('#') + 2)) + 8);
  }
  EXPECT_GT(phases, 0u);
}

TEST(Segment, CoverageAndSubChunkBounds) {
  SegmentationConfig cfg;
  for (std::size_t n : {1u, 17u, 255u, 256u, 383u, 384u, 385u, 999u, 2500u}) {
    const auto doc = segment({"d", words(n), "en"}, cfg);
    std::vector<bool> covered(n, false);
    for (const auto& s : doc.subchunks) {
      EXPECT_LE(s.token_span.size(), cfg.sub_tokens);
      EXPECT_EQ(s.tokens.size(), s.doc_span.size());
      for (std::size_t i = s.doc_span.begin; i < s.doc_span.end; ++i) covered[i] = true;
    }
    EXPECT_TRUE(std::all_of(covered.begin(), covered.end(), [](bool b) { return b; })) << n;
  }
}

TEST(Segment, PureFunctionOfInput) {
  SegmentationConfig cfg;
  cfg.dense_stride = 128;
  const Document d{"d", words(1500), "en"};
  const auto a = segment(d, cfg), b = segment(d, cfg);
  ASSERT_EQ(a.subchunks.size(), b.subchunks.size());
  for (std::size_t i = 0; i < a.subchunks.size(); ++i) {
    EXPECT_EQ(a.subchunks[i].sub_id, b.subchunks[i].sub_id);
    EXPECT_EQ(a.subchunks[i].tokens.tokens, b.subchunks[i].tokens.tokens);
  }
}

TEST(Segment, InvalidConfigRejected) {
  SegmentationConfig cfg;
  cfg.chunk_overlap = cfg.chunk_tokens;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.sub_stride = cfg.sub_tokens + 1;
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(Windows, CeilDivisionCounts) {
  for (auto [len, k, last] : std::vector<std::tuple<std::size_t, std::size_t, std::size_t>>{
           {256, 16, 16}, {250, 16, 10}, {5, 1, 5}}) {
    const auto w = windows_of(tokenize(words(len)), 16);
    ASSERT_EQ(w.size(), k);
    EXPECT_EQ(w.back().size(), last);
    const std::size_t total = std::accumulate(
        w.begin(), w.end(), std::size_t{0}, [](std::size_t a, const TokenSeq& t) { return a + t.size(); });
    EXPECT_EQ(total, len);
  }
}

TEST(Windows, SubChunkWindowsCoverInOrder) {
  const auto doc = segment({"d", words(700), "en"}, SegmentationConfig{});
  for (const auto& s : doc.subchunks) {
    std::vector<std::string> joined;
    const auto ws = windows_of(s, 16);
    for (std::size_t i = 0; i < ws.size(); ++i) {
      EXPECT_EQ(ws[i].window_index, i);
      EXPECT_EQ(ws[i].sub_id, s.sub_id);
      joined.insert(joined.end(), ws[i].tokens.tokens.begin(), ws[i].tokens.tokens.end());
    }
    EXPECT_EQ(joined, s.tokens.tokens);
  }
}

}  // namespace
}  // namespace qwb
