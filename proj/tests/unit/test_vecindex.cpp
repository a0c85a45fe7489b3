// Copyright 2026 The qwbench Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "qwb/error.hpp"
#include "qwb/vecindex.hpp"

namespace qwb {
namespace {

Embedding unit(std::string id, double angle, Channel ch = Channel::kCurrent) {
  return {{std::cos(angle), std::sin(angle)}, std::move(id), ch};
}

TEST(VecIndex, ExactSearchOrderAndTies) {
  const std::vector<Embedding> rows{unit("c", 0.0), unit("a", 0.5), unit("b", 0.0), unit("d", 3.0)};
  const auto idx = VecIndex::build(rows);
  const auto r = idx.search(unit("q", 0.0));
  ASSERT_EQ(r.size(), 4u);
  EXPECT_EQ(r[0].id, "b");
  EXPECT_EQ(r[1].id, "c");
  EXPECT_EQ(r[2].id, "a");
  EXPECT_EQ(r[3].id, "d");
  EXPECT_LE(r[0].score, 1.0);
  EXPECT_EQ(idx.search(unit("q", 0.0), 2).size(), 2u);
}

TEST(VecIndex, BuildAndSearchErrors) {
  EXPECT_THROW(VecIndex::build(std::vector<Embedding>{unit("a", 0), unit("a", 1)}), Error);
  EXPECT_THROW(VecIndex::build(std::vector<Embedding>{unit("a", 0), unit("b", 1, Channel::kAmp)}), Error);
  try {
    VecIndex::build(std::vector<Embedding>{{{0.5, 0.5}, "a", Channel::kCurrent}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kZeroVector);
  }
  const auto idx = VecIndex::build(std::vector<Embedding>{unit("a", 0)});
  try {
    idx.search(unit("q", 0, Channel::kAmp));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kChannelMismatch);
  }
  EXPECT_THROW(idx.search({{1.0, 0.0, 0.0}, "q", Channel::kCurrent}), Error);
}

TEST(VecIndex, TeacherAndDistilledAreCompatible) {
  EXPECT_TRUE(channels_compatible(Channel::kTeacher, Channel::kDistilled));
  EXPECT_FALSE(channels_compatible(Channel::kCurrent, Channel::kAmp));
  const auto idx = VecIndex::build(std::vector<Embedding>{unit("a", 0, Channel::kTeacher)});
  EXPECT_NO_THROW(idx.search(unit("q", 0, Channel::kDistilled)));
}

TEST(DocAggregation, MaxAndMean) {
  const std::vector<Embedding> rows{unit("d1#a", 0.0), unit("d1#b", 1.5), unit("d2#a", 0.3)};
  const auto idx = VecIndex::build(rows);
  const std::map<std::string, std::string> doc_of{{"d1#a", "d1"}, {"d1#b", "d1"}, {"d2#a", "d2"}};
  const auto mx = doc_score_from_subchunks(idx, unit("q", 0.0), doc_of, DocAggregation::kMax);
  ASSERT_EQ(mx.size(), 2u);
  EXPECT_EQ(mx[0].id, "d1");
  EXPECT_NEAR(mx[0].score, 1.0, 1e-15);
  const auto mean = doc_score_from_subchunks(idx, unit("q", 0.0), doc_of, DocAggregation::kMean);
  EXPECT_EQ(mean[0].id, "d2");
  EXPECT_NEAR(mean[1].score, (1.0 + std::cos(1.5)) / 2, 1e-15);
  try {
    doc_score_from_subchunks(idx, unit("q", 0.0), {{"d1#a", "d1"}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMappingError);
  }
}

}  // namespace
}  // namespace qwb
