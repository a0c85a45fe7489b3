// Copyright 2026 The qwbench Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <set>

#include "qwb/embed.hpp"
#include "qwb/error.hpp"

namespace qwb {
namespace {

std::vector<WindowFeatures> ramp(std::size_t K, std::size_t F) {
  std::vector<WindowFeatures> w(K);
  for (std::size_t i = 0; i < K; ++i) w[i] = {std::vector<double>(F, static_cast<double>(i + 1)), "u", i};
  return w;
}

double norm(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

const std::string kText =
    "the river bank flooded after the storm and the bank of the river moved east while "
    "merchants carried grain across the old stone bridge toward the market square";

TEST(Resample, EvenSplitMeans) {
  const auto slots = resample_windows(ramp(32, 2), 16);
  ASSERT_EQ(slots.size(), 16u);
  for (std::size_t j = 0; j < 16; ++j) EXPECT_DOUBLE_EQ(slots[j][0], 2.0 * j + 1.5);
}

TEST(Resample, FewerWindowsThanSlotsBackfill) {
  const auto slots = resample_windows(ramp(3, 1), 8);
  // Cells: j*3/8 -> [0,0) [0,0) [0,1) [1,1) [1,1) [1,2) [2,2) [2,3)
  const std::vector<double> expect{1, 1, 1, 1, 1, 2, 2, 3};
  for (std::size_t j = 0; j < 8; ++j) EXPECT_DOUBLE_EQ(slots[j][0], expect[j]) << j;
  EXPECT_THROW(resample_windows({}, 16), Error);
}

TEST(Assemble, DimensionContract) {
  PipelineConfig cfg;
  const auto e = assemble(ramp(5, 64), cfg, "x");
  EXPECT_EQ(e.vec.size(), kEmbeddingDim);
  EXPECT_NEAR(norm(e.vec), 1.0, 1e-12);
  EXPECT_THROW(assemble(ramp(5, 63), cfg, "x"), Error);
  cfg.W = 8;
  EXPECT_THROW(assemble(ramp(5, 64), cfg, "x"), Error);
  try {
    l2_normalized(std::vector<double>(4, 0.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kAllZeroEmbedding);
  }
}

TEST(Embed, ZeroAnglesGiveKnownConstantVector) {
  PipelineConfig cfg;
  const auto obs = default_observables(cfg.circuit.n_qubits, cfg.F);
  const auto f = circuit_features(std::vector<double>(cfg.circuit.n_qubits, 0.0), obs, cfg, 0);
  std::vector<WindowFeatures> w{{f, "u", 0}, {f, "u", 1}};
  const auto e = assemble(w, cfg, "u");
  // Z singles (12) and ZZ ring terms (12) are 1 on |0...0>, all others 0.
  const double v = 1.0 / std::sqrt(24.0 * 16.0);
  for (std::size_t s = 0; s < cfg.W; ++s)
    for (std::size_t c = 0; c < cfg.F; ++c) {
      const bool one = c < 12 || (c >= 36 && c < 48);
      EXPECT_NEAR(e.vec[s * cfg.F + c], one ? v : 0.0, 1e-12);
    }
}

TEST(Embed, UnitNormAndBitIdenticalRerun) {
  PipelineConfig cfg;
  cfg.angle_source = AngleMode::kLexical;
  const auto t = tokenize(kText);
  EmbedStats stats;
  const auto a = embed_tokens(t, "s", nullptr, cfg, &stats);
  const auto b = embed_tokens(t, "s", nullptr, cfg);
  EXPECT_EQ(a.vec, b.vec);
  EXPECT_EQ(a.vec.size(), kEmbeddingDim);
  EXPECT_NEAR(norm(a.vec), 1.0, 1e-9);
  EXPECT_EQ(stats.eig_windows, 0u);
  EXPECT_EQ(stats.lexical_windows, 2u);
}

TEST(Embed, EigAxesUsedWhenAvailable) {
  PipelineConfig cfg;
  std::vector<TokenSeq> units{tokenize(kText), tokenize(kText + " again and again")};
  const auto axes = build_axes(units, cfg.axes);
  EmbedStats stats;
  const auto e = embed_tokens(tokenize("the river bank storm"), "q", &axes, cfg, &stats);
  EXPECT_EQ(stats.eig_windows, 1u);
  EXPECT_NEAR(norm(e.vec), 1.0, 1e-9);
  EmbedStats oov;
  embed_tokens(tokenize("zzz yyy"), "q", &axes, cfg, &oov);
  EXPECT_EQ(oov.lexical_windows, 1u);
}

TEST(Embed, AmpChannelAndQksProduceUnitVectors) {
  PipelineConfig cfg;
  cfg.angle_source = AngleMode::kLexical;
  cfg.channel = Channel::kAmp;
  const auto a = embed_tokens(tokenize(kText), "s", nullptr, cfg);
  EXPECT_EQ(a.channel, Channel::kAmp);
  EXPECT_NEAR(norm(a.vec), 1.0, 1e-9);
  cfg.channel = Channel::kCurrent;
  cfg.qks_episodes = 3;
  const auto q1 = embed_tokens(tokenize(kText), "s", nullptr, cfg);
  const auto q2 = embed_tokens(tokenize(kText), "s", nullptr, cfg);
  EXPECT_EQ(q1.vec, q2.vec);
  EXPECT_NEAR(norm(q1.vec), 1.0, 1e-9);
}

TEST(Embed, ShotModeIsSeeded) {
  PipelineConfig cfg;
  cfg.angle_source = AngleMode::kLexical;
  cfg.circuit.shots = 256;
  cfg.circuit.seed = 5;
  const auto a = embed_tokens(tokenize(kText), "s", nullptr, cfg);
  const auto b = embed_tokens(tokenize(kText), "s", nullptr, cfg);
  EXPECT_EQ(a.vec, b.vec);
  cfg.circuit.seed = 6;
  EXPECT_NE(a.vec, embed_tokens(tokenize(kText), "s", nullptr, cfg).vec);
}

TEST(Embed, DocumentAndMultiscale) {
  PipelineConfig cfg;
  cfg.angle_source = AngleMode::kLexical;
  cfg.seg.two_phase_shift = 8;
  cfg.seg.dense_stride = 128;
  cfg.multiscale = true;
  std::string text;
  for (int i = 0; i < 700; ++i) text += "w" + std::to_string(i % 97) + " ";
  const auto doc = segment({"d", text, "en"}, cfg.seg);
  const auto subs = embed_document(doc, nullptr, cfg);
  std::size_t base = 0;
  for (const auto& s : doc.subchunks) base += s.role == SubChunkRole::kBase;
  ASSERT_EQ(subs.size(), base);
  for (const auto& s : subs) EXPECT_NEAR(norm(s.vec), 1.0, 1e-9);
  const auto& first = doc.subchunks.front();
  EXPECT_GE(views_of(first, doc, cfg).size(), 2u);
  const auto d = document_embedding(subs, "d");
  EXPECT_NEAR(norm(d.vec), 1.0, 1e-9);
  const std::vector<std::vector<double>> views{{1, 0}, {0, 1}};
  const auto f = multiscale_fuse(views, "x", Channel::kCurrent);
  EXPECT_NEAR(f.vec[0], 1 / std::sqrt(2.0), 1e-15);
}

TEST(Fingerprint, EveryFieldChangesDigest) {
  const PipelineConfig base;
  const std::string ref = fingerprint(base).digest;
  EXPECT_EQ(ref.size(), 64u);
  EXPECT_EQ(fingerprint(base).digest, ref);
  std::vector<std::function<void(PipelineConfig&)>> edits{
      [](auto& c) { c.seg.chunk_tokens += 1; },   [](auto& c) { c.seg.chunk_overlap += 1; },
      [](auto& c) { c.seg.sub_tokens += 1; },     [](auto& c) { c.seg.sub_stride -= 1; },
      [](auto& c) { c.seg.window_tokens += 1; },  [](auto& c) { c.seg.dense_stride = 64; },
      [](auto& c) { c.seg.two_phase_shift = 8; }, [](auto& c) { c.circuit.n_qubits = 8; },
      [](auto& c) { c.circuit.n_layers = 2; },    [](auto& c) { c.circuit.shots = 2048; },
      [](auto& c) { c.circuit.seed = 99; },       [](auto& c) { c.axes.d_max = 16; },
      [](auto& c) { c.axes.context = 3; },        [](auto& c) { c.axes.gamma = 0.5; },
      [](auto& c) { c.axes.epsilon = 1e-6; },     [](auto& c) { c.axes.scaling = AxisScaling::kU; },
      [](auto& c) { c.angle_source = AngleMode::kLexical; },
      [](auto& c) {
        c.W = 32;
        c.F = 32;
      },
      [](auto& c) { c.F = 32; },                  [](auto& c) { c.qks_episodes = 2; },
      [](auto& c) { c.multiscale = true; },       [](auto& c) { c.channel = Channel::kAmp; },
  };
  std::set<std::string> seen{ref};
  for (std::size_t i = 0; i < edits.size(); ++i) {
    PipelineConfig c;
    edits[i](c);
    EXPECT_TRUE(seen.insert(fingerprint(c).digest).second) << "edit " << i;
  }
}

TEST(PipelineConfig, JsonRoundTripAndUnknownKeys) {
  PipelineConfig c;
  c.axes.gamma = 0.25;
  c.channel = Channel::kAmp;
  const auto back = PipelineConfig::from_json(c.to_json());
  EXPECT_EQ(back.to_json(), c.to_json());
  EXPECT_THROW(PipelineConfig::from_json({{"bogus", 1}}), Error);
  EXPECT_THROW(PipelineConfig::from_json({{"circuit", {{"qubits", 3}}}}), Error);
}

TEST(Cosine, BasicsAndZeroVector) {
  EXPECT_DOUBLE_EQ(cosine(std::vector<double>{1, 0}, std::vector<double>{0, 2}), 0.0);
  EXPECT_DOUBLE_EQ(cosine(std::vector<double>{1, 1}, std::vector<double>{2, 2}), 1.0);
  EXPECT_THROW(cosine(std::vector<double>{0, 0}, std::vector<double>{1, 0}), Error);
}

}  // namespace
}  // namespace qwb
