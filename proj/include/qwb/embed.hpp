// Copyright 2026 The qwbench Authors
// SPDX-License-Identifier: Apache-2.0

// Sub-chunk embedding assembly: per-window circuit features are resampled to
// W slots, concatenated and L2-normalized into a fixed 1024-d vector.

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "qwb/angles.hpp"
#include "qwb/corpus.hpp"
#include "qwb/qsim.hpp"

namespace qwb {

inline constexpr std::size_t kEmbeddingDim = 1024;

enum class Channel { kCurrent, kAmp, kDistilled, kTeacher };

std::string_view to_string(Channel channel);
Channel channel_from_string(std::string_view name);

enum class AngleMode { kEig, kLexical };

std::string_view to_string(AngleMode mode);
AngleMode angle_mode_from_string(std::string_view name);

struct PipelineConfig {
  SegmentationConfig seg;
  CircuitConfig circuit;
  AxesOptions axes;
  AngleMode angle_source = AngleMode::kEig;
  std::size_t W = 16;
  std::size_t F = 64;
  std::size_t qks_episodes = 0;  // 0 disables the random expansion
  bool multiscale = false;
  Channel channel = Channel::kCurrent;

  void validate() const;
  nlohmann::json to_json() const;
  /// Missing keys keep their defaults; unknown keys are rejected.
  static PipelineConfig from_json(const nlohmann::json& j);
};

struct Fingerprint {
  std::string digest;  // 64 hex chars
  std::string canonical_config;
};

/// SHA-256 over the canonical (sorted-key) JSON of the config.
Fingerprint fingerprint(const PipelineConfig& cfg);

struct WindowFeatures {
  std::vector<double> f;
  std::string sub_id;
  std::size_t window_index = 0;
};

struct Embedding {
  std::vector<double> vec;
  std::string owner_id;
  Channel channel = Channel::kCurrent;
};

/// Counts of windows per angle source, for auditing.
struct EmbedStats {
  std::size_t eig_windows = 0;
  std::size_t lexical_windows = 0;

  EmbedStats& operator+=(const EmbedStats& o) {
    eig_windows += o.eig_windows;
    lexical_windows += o.lexical_windows;
    return *this;
  }
};

/// Maps K window feature vectors onto W slots: slot j averages windows
/// [floor(jK/W), floor((j+1)K/W)); empty slots copy the nearest preceding
/// non-empty slot. Throws Error(kNoWindows) when K == 0.
std::vector<std::vector<double>> resample_windows(std::span<const WindowFeatures> features,
                                                  std::size_t W);

/// Concatenated slots, not normalized.
std::vector<double> concat_slots(const std::vector<std::vector<double>>& slots);

/// Unit-norm copy; throws Error(kAllZeroEmbedding) for the zero vector.
std::vector<double> l2_normalized(std::vector<double> v);

/// resample + concatenate + normalize. Throws Error(kDimensionMismatch) if a
/// window does not have F features or W * F != 1024.
Embedding assemble(std::span<const WindowFeatures> features, const PipelineConfig& cfg,
                   std::string owner_id);

/// Feature vector of one angle vector under the configured channel.
std::vector<double> circuit_features(std::span<const double> theta, const ObservableSet& obs,
                                     const PipelineConfig& cfg, std::uint64_t seed);

/// Per-window features of one token sequence (no resampling).
std::vector<WindowFeatures> window_features(const TokenSeq& tokens, std::string_view unit_id,
                                            const SemanticAxes* axes,
                                            const PipelineConfig& cfg,
                                            EmbedStats* stats = nullptr);

/// Unnormalized concatenated slot vector for one view of a unit.
std::vector<double> embed_view(const TokenSeq& tokens, std::string_view unit_id,
                               const SemanticAxes* axes, const PipelineConfig& cfg,
                               EmbedStats* stats = nullptr);

/// Single-view embedding of an arbitrary token sequence (queries, sentences).
Embedding embed_tokens(const TokenSeq& tokens, std::string owner_id, const SemanticAxes* axes,
                       const PipelineConfig& cfg, EmbedStats* stats = nullptr);

Embedding embed_subchunk(const SubChunk& sub, const SemanticAxes* axes,
                         const PipelineConfig& cfg, EmbedStats* stats = nullptr);

/// Mean of unnormalized view vectors, then L2 normalization.
Embedding multiscale_fuse(std::span<const std::vector<double>> views, std::string owner_id,
                          Channel channel);

/// Views of a base sub-chunk: itself, its phase-shifted twin when present,
/// and (with multiscale on) dense sub-chunks of the same chunk starting
/// strictly inside it.
std::vector<const SubChunk*> views_of(const SubChunk& base, const SegmentedDocument& doc,
                                      const PipelineConfig& cfg);

/// One embedding per base sub-chunk of the document.
std::vector<Embedding> embed_document(const SegmentedDocument& doc, const SemanticAxes* axes,
                                      const PipelineConfig& cfg, EmbedStats* stats = nullptr);

/// Normalized mean of sub-chunk embeddings.
Embedding document_embedding(std::span<const Embedding> subs, std::string doc_id);

double dot(std::span<const double> a, std::span<const double> b);
double cosine(std::span<const double> a, std::span<const double> b);

}  // namespace qwb
