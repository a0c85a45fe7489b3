// Copyright 2026 The qwbench Authors
// SPDX-License-Identifier: Apache-2.0

// Fidelity-kernel diagnostic: embeddings are reduced by PCA to one
// coordinate per qubit, min-max rescaled to angles in [-pi, pi], prepared
// with the ansatz circuit and compared through K_ij = |<psi_i|psi_j>|^2.

#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qwb/evalkit.hpp"
#include "qwb/qsim.hpp"

namespace qwb {

struct PcaModel {
  Eigen::VectorXd mean;                // D
  Eigen::MatrixXd components;          // d x D, orthonormal rows
  Eigen::VectorXd explained_variance;  // d

  /// Rows of X projected onto the components (m x d).
  Eigen::MatrixXd project(const Eigen::MatrixXd& X) const;
};

/// Top-d principal directions of the rows of X; each direction is signed so
/// its largest-magnitude entry is positive. Throws Error(kInsufficientSamples)
/// when X has fewer than d rows.
PcaModel fit_pca(const Eigen::MatrixXd& X, std::size_t d);

/// Per-column min-max rescale of P onto [-pi, pi]; constant columns map to 0.
Eigen::MatrixXd angle_rescale(const Eigen::MatrixXd& P);

struct KernelMatrix {
  std::vector<std::string> ids;
  Eigen::MatrixXd K;
};

/// Fidelity kernel of ansatz states prepared from each row of `angles`.
KernelMatrix fidelity_kernel(const Eigen::MatrixXd& angles, std::vector<std::string> ids,
                             const CircuitConfig& cfg, std::size_t jobs = 1);

/// project -> angle_rescale -> fidelity_kernel. Requires d == n_qubits.
KernelMatrix encode_and_kernel(const Eigen::MatrixXd& X, std::vector<std::string> ids,
                               const PcaModel& pca, const CircuitConfig& cfg,
                               std::size_t jobs = 1);

double min_eigenvalue(const Eigen::MatrixXd& K);

struct KernelDiagnostics {
  std::size_t n_pairs = 0;
  double mean = 0.0;
  std::optional<double> pearson;
  std::optional<double> spearman;
  double min_eigenvalue = 0.0;
  Histogram histogram;  // 20 bins over [0, 1]

  nlohmann::json to_json() const;
};

/// Statistics over the upper triangle of K. With a reference matrix, also
/// its correlations (throws Error(kUndefined) if either side is constant).
KernelDiagnostics kernel_diagnostics(const KernelMatrix& K,
                                     const Eigen::MatrixXd* reference = nullptr);

/// CSV with an id header row and id first column.
void write_kernel_csv(const std::filesystem::path& path, const KernelMatrix& K);

}  // namespace qwb
