// Copyright 2026 The qwbench Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qwb {

/// Machine-readable failure codes. The CLI reports these verbatim in its
/// JSON error envelope, so the spelling returned by to_string() is stable.
enum class ErrorCode {
  kEmptyText,
  kInvalidConfig,
  kAxesRankDeficient,
  kThetaDimension,
  kObservablePoolExhausted,
  kZeroVector,
  kDimensionMismatch,
  kNoWindows,
  kAllZeroEmbedding,
  kSingularSystem,
  kTrainingDiverged,
  kInsufficientOverlap,
  kEmptyCorpus,
  kChannelMismatch,
  kMappingError,
  kEmptyCandidates,
  kInvalidAlpha,
  kMissingRanking,
  kUndefined,
  kInsufficientSamples,
  kFingerprintMismatch,
  kIo,
  kParse,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace qwb
