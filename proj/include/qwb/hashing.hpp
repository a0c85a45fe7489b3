// Copyright 2026 The qwbench Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <string_view>

namespace qwb {

/// SplitMix64 finalizer. Used to derive independent seeds.
std::uint64_t mix64(std::uint64_t x);

/// Stable 64-bit string hash (FNV-1a over the UTF-8 bytes, then mixed with
/// the seed). Identical on every platform and run.
std::uint64_t stable_hash64(std::string_view bytes, std::uint64_t seed = 0);

/// Seed for a per-unit random substream, e.g. (seed, sub_id, window_index).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view key,
                          std::uint64_t index);

/// Lowercase hex SHA-256 of a byte string (64 characters).
std::string sha256_hex(std::string_view bytes);

/// SHA-256 of a file's contents; throws Error(kIo) if unreadable.
std::string sha256_file(const std::filesystem::path& path);

/// Seeded generator with portable draws. std:: distributions are
/// implementation-defined, so uniform and normal variates are derived
/// directly from the 64-bit engine output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal (Box-Muller, cached pair).
  double normal();
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace qwb
