// Copyright 2026 The qwbench Authors
// SPDX-License-Identifier: Apache-2.0

// Window -> angle vector mapping. Semantic axes come from a truncated SVD of
// a log-damped token co-occurrence matrix; windows with no in-vocabulary
// token fall back to a hashed lexical projection.

#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "qwb/corpus.hpp"

namespace qwb {

enum class AxisScaling { kU, kUSigma, kUSqrtSigma };

std::string_view to_string(AxisScaling scaling);
AxisScaling axis_scaling_from_string(std::string_view name);

struct AxesOptions {
  std::size_t d_max = 12;
  std::size_t context = 5;
  double gamma = 1.0;
  double epsilon = 1e-8;
  AxisScaling scaling = AxisScaling::kUSqrtSigma;
  /// Vocabularies larger than this use randomized subspace iteration
  /// instead of a dense SVD.
  std::size_t dense_svd_limit = 2000;
};

struct SemanticAxes {
  std::vector<std::string> terms;  // sorted; row i of E belongs to terms[i]
  std::unordered_map<std::string, std::size_t> vocab;
  Eigen::MatrixXd E;  // V x d_max
  Eigen::VectorXd mu;
  Eigen::VectorXd sigma;
  Eigen::VectorXd singular_values;
  double gamma = 1.0;
  double epsilon = 1e-8;
  AxisScaling scaling = AxisScaling::kUSqrtSigma;

  std::size_t d_max() const { return static_cast<std::size_t>(E.cols()); }
  std::size_t vocab_size() const { return terms.size(); }
};

enum class AngleSource { kEig, kLexicalFallback };

std::string_view to_string(AngleSource source);

struct AngleVector {
  std::vector<double> theta;
  AngleSource source = AngleSource::kEig;
};

/// Sorted distinct tokens of the given units.
std::vector<std::string> build_vocabulary(std::span<const TokenSeq> units);

/// Symmetric co-occurrence counts: every ordered token pair at distance
/// 1..context inside one unit adds 1 to both (a,b) and (b,a).
Eigen::SparseMatrix<double> cooccurrence_counts(
    std::span<const TokenSeq> units,
    const std::unordered_map<std::string, std::size_t>& vocab, std::size_t context);

struct TruncatedSvd {
  Eigen::MatrixXd U;         // V x rank, orthonormal columns
  Eigen::VectorXd singular;  // descending
};

/// Rank-`rank` truncated SVD. Columns follow a deterministic sign
/// convention: the largest-magnitude entry of each column is positive.
TruncatedSvd truncated_svd(const Eigen::SparseMatrix<double>& C, std::size_t rank,
                           std::size_t dense_limit = 2000);

/// Throws Error(kAxesRankDeficient) when the vocabulary is smaller than
/// d_max.
SemanticAxes build_axes(std::span<const TokenSeq> units, const AxesOptions& opts);

/// Mean axis row of the in-vocabulary tokens, z-scored, truncated to d and
/// clipped to [-pi, pi] after scaling by gamma. Falls back to
/// lexical_angles() when no token is in the vocabulary.
AngleVector eig_angles(std::span<const std::string> tokens, const SemanticAxes& axes,
                       std::size_t d);

/// Per-dimension mean of seeded token hashes mapped to [-1, 1], scaled by
/// pi. Empty input gives the zero vector.
AngleVector lexical_angles(std::span<const std::string> tokens, std::size_t d);

/// eig_angles() when axes are given, lexical_angles() otherwise.
AngleVector window_angles(std::span<const std::string> tokens,
                          const SemanticAxes* axes, std::size_t d);

void save_axes(const std::filesystem::path& path, const SemanticAxes& axes);
SemanticAxes load_axes(const std::filesystem::path& path);
void export_axes_json(const std::filesystem::path& path, const SemanticAxes& axes);

}  // namespace qwb
