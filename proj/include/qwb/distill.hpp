// Copyright 2026 The qwbench Authors
// SPDX-License-Identifier: Apache-2.0

// Teacher-student alignment heads. A head g maps a student embedding e to
// z = g(e) and is trained on mean ||g(e) - t||^2 against teacher vectors t.
// Both head kinds work on row-per-sample Eigen matrices.

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "qwb/embed.hpp"

namespace qwb {

enum class HeadKind { kLinear, kMlp };

std::string_view to_string(HeadKind kind);
HeadKind head_kind_from_string(std::string_view name);

struct TrainingMeta {
  std::size_t epochs = 0;
  double lr = 0.0;
  double momentum = 0.0;
  std::size_t batch = 0;
  std::uint64_t seed = 0;
  double lambda = 0.0;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  std::vector<double> loss_curve;  // full-data loss after each epoch
};

struct DistillHead {
  HeadKind kind = HeadKind::kLinear;
  // linear: z = W e + b
  Eigen::MatrixXd W;
  Eigen::VectorXd b;
  // mlp: z = W2 tanh(W1 e + b1) + b2
  Eigen::MatrixXd W1;
  Eigen::VectorXd b1;
  Eigen::MatrixXd W2;
  Eigen::VectorXd b2;
  TrainingMeta meta;

  std::size_t input_dim() const;
  std::size_t output_dim() const;

  /// Raw (unnormalized) outputs for each row of X.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& X) const;
};

DistillHead identity_head(std::size_t dim);

/// Closed-form ridge least squares on the normal equations; the bias is not
/// penalized. Throws Error(kSingularSystem) when the system is singular
/// (typically lambda == 0 with fewer than dim + 1 pairs).
DistillHead fit_linear(const Eigen::MatrixXd& X, const Eigen::MatrixXd& T, double lambda = 1e-3);

struct MlpOptions {
  std::size_t hidden = 1024;
  std::size_t epochs = 50;
  double lr = 0.05;
  double momentum = 0.9;
  std::size_t batch = 32;
  std::uint64_t seed = 0;
};

/// Seeded Xavier-uniform initialization of an MLP head.
DistillHead init_mlp(std::size_t in, std::size_t hidden, std::size_t out, std::uint64_t seed);

/// Mini-batch SGD with momentum. Throws Error(kTrainingDiverged) when the
/// epoch loss exceeds 10x the initial loss or stops being finite.
DistillHead fit_mlp(const Eigen::MatrixXd& X, const Eigen::MatrixXd& T, const MlpOptions& opts);

/// Mean over rows of ||g(x) - t||^2.
double head_loss(const DistillHead& head, const Eigen::MatrixXd& X, const Eigen::MatrixXd& T);

struct MlpGradients {
  Eigen::MatrixXd W1;
  Eigen::VectorXd b1;
  Eigen::MatrixXd W2;
  Eigen::VectorXd b2;
};

/// Analytic gradient of head_loss() for an MLP head.
MlpGradients mlp_gradients(const DistillHead& head, const Eigen::MatrixXd& X,
                           const Eigen::MatrixXd& T);

/// z = g(e) / ||g(e)||, channel = distilled. Throws Error(kZeroVector).
Embedding apply(const DistillHead& head, const Embedding& e);

struct AlignmentReport {
  double r = 0.0;    // Pearson of pairwise cosines, student vs teacher
  double mae = 0.0;  // mean |cos_student - cos_teacher|
  std::optional<double> coordinate_r;  // Pearson over raw coordinates
  std::size_t n_pairs = 0;
  std::size_t shared_ids = 0;

  nlohmann::json to_json() const;
};

/// Samples n_pairs id pairs (all pairs when n_pairs is 0 or exceeds the
/// number available). Throws Error(kInsufficientOverlap) with fewer than two
/// shared ids.
AlignmentReport alignment_report(std::span<const Embedding> student,
                                 std::span<const Embedding> teacher, std::size_t n_pairs,
                                 std::uint64_t seed);

void save_head(const std::filesystem::path& path, const DistillHead& head,
               const nlohmann::json& extra_meta = nlohmann::json::object());
DistillHead load_head(const std::filesystem::path& path);

}  // namespace qwb
