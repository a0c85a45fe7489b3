// Copyright 2026 The qwbench Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "qwb/error.hpp"
#include "qwb/hashing.hpp"
#include "qwb/store.hpp"

namespace qwb {
namespace {

namespace fs = std::filesystem;

fs::path temp(const std::string& name) { return fs::temp_directory_path() / ("qwb_store_" + name); }

TEST(Store, BinaryRoundTripWithSidecar) {
  const std::vector<Embedding> recs{{{0.6, 0.8, 0.0}, "a", Channel::kCurrent},
                                    {{0.0, 0.0, 1.0}, "b", Channel::kCurrent}};
  const auto p = temp("rt.bin");
  save_embeddings(p, recs, {{"fingerprint", "abc"}, {"level", "sub"}});
  const auto back = load_embeddings(p);
  ASSERT_EQ(back.records.size(), 2u);
  EXPECT_EQ(back.fingerprint(), "abc");
  EXPECT_EQ(back.records[1].owner_id, "b");
  EXPECT_EQ(back.records[0].channel, Channel::kCurrent);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(back.records[0].vec[i], recs[0].vec[i], 1e-7);
  fs::remove(p);
  fs::remove(p.string() + ".json");
}

TEST(Store, ReadsExporterJsonl) {
  const auto p = temp("teacher.jsonl");
  {
    std::ofstream out(p);
    out << R"({"id": "s1", "channel": "teacher", "vec": [3.0, 4.0]})" << "\n\n";
    out << R"({"id": "s2", "vec": [0.0, 2.0]})" << "\n";
  }
  const auto recs = read_embeddings_jsonl(p);
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[0].channel, Channel::kTeacher);
  EXPECT_EQ(recs[1].channel, Channel::kTeacher);
  EXPECT_NEAR(recs[0].vec[0], 0.6, 1e-15);
  EXPECT_NEAR(recs[1].vec[1], 1.0, 1e-15);
  EXPECT_EQ(load_embeddings(p).records.size(), 2u);
  fs::remove(p);
}

TEST(Store, JsonlErrors) {
  const auto p = temp("bad.jsonl");
  auto expect_code = [&](const std::string& body, ErrorCode code) {
    {
      std::ofstream out(p);
      out << body;
    }
    try {
      read_embeddings_jsonl(p);
      ADD_FAILURE() << body;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), code) << body;
    }
  };
  expect_code("{not json}\n", ErrorCode::kParse);
  expect_code(R"({"id": "x", "vec": [0, 0]})" "\n", ErrorCode::kZeroVector);
  expect_code(R"({"id": "x", "vec": [1, 0]})" "\n" R"({"id": "y", "vec": [1, 0, 0]})" "\n",
              ErrorCode::kDimensionMismatch);
  fs::remove(p);
}

TEST(Store, JsonlWriteReadRoundTrip) {
  const auto p = temp("rt.jsonl");
  const std::vector<Embedding> recs{{{1.0, 0.0}, "x", Channel::kDistilled}};
  write_embeddings_jsonl(p, recs);
  const auto back = read_embeddings_jsonl(p);
  EXPECT_EQ(back[0].channel, Channel::kDistilled);
  EXPECT_EQ(back[0].vec, recs[0].vec);
  fs::remove(p);
}

TEST(Hashing, KnownVectorsAndStability) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(stable_hash64("token", 3), stable_hash64("token", 3));
  EXPECT_NE(stable_hash64("token", 3), stable_hash64("token", 4));
  EXPECT_NE(derive_seed(1, "a", 0), derive_seed(1, "a", 1));
  Rng a(42), b(42);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a.normal(), b.normal());
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_LT(a.below(7), 7u);
  }
}

}  // namespace
}  // namespace qwb
