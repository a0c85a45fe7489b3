// Copyright 2026 The qwbench Authors
// SPDX-License-Identifier: Apache-2.0

#include "qwb/error.hpp"

namespace qwb {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kEmptyText: return "EmptyText";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kAxesRankDeficient: return "AxesRankDeficient";
    case ErrorCode::kThetaDimension: return "ThetaDimension";
    case ErrorCode::kObservablePoolExhausted: return "ObservablePoolExhausted";
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNoWindows: return "NoWindows";
    case ErrorCode::kAllZeroEmbedding: return "AllZeroEmbedding";
    case ErrorCode::kSingularSystem: return "SingularSystem";
    case ErrorCode::kTrainingDiverged: return "TrainingDiverged";
    case ErrorCode::kInsufficientOverlap: return "InsufficientOverlap";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kChannelMismatch: return "ChannelMismatch";
    case ErrorCode::kMappingError: return "MappingError";
    case ErrorCode::kEmptyCandidates: return "EmptyCandidates";
    case ErrorCode::kInvalidAlpha: return "InvalidAlpha";
    case ErrorCode::kMissingRanking: return "MissingRanking";
    case ErrorCode::kUndefined: return "Undefined";
    case ErrorCode::kInsufficientSamples: return "InsufficientSamples";
    case ErrorCode::kFingerprintMismatch: return "FingerprintMismatch";
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kParse: return "ParseError";
  }
  return "Unknown";
}

}  // namespace qwb
