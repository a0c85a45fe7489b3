// Copyright 2026 The qwbench Authors
// SPDX-License-Identifier: Apache-2.0

#include "qwb/qkernel.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "qwb/error.hpp"
#include "qwb/parallel.hpp"

namespace qwb {

Eigen::MatrixXd PcaModel::project(const Eigen::MatrixXd& X) const {
  if (X.cols() != mean.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "PCA input dimension mismatch");
  }
  return (X.rowwise() - mean.transpose()) * components.transpose();
}

PcaModel fit_pca(const Eigen::MatrixXd& X, std::size_t d) {
  const auto m = static_cast<std::size_t>(X.rows());
  if (d == 0 || m < d || m < 2) {
    throw Error(ErrorCode::kInsufficientSamples,
                "PCA with " + std::to_string(d) + " components needs at least that many rows (have " +
                    std::to_string(m) + ")");
  }
  if (static_cast<std::size_t>(X.cols()) < d) {
    throw Error(ErrorCode::kInsufficientSamples, "more components than input dimensions");
  }
  PcaModel pca;
  pca.mean = X.colwise().mean().transpose();
  const Eigen::MatrixXd C = X.rowwise() - pca.mean.transpose();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(C, Eigen::ComputeThinV);
  const auto k = static_cast<Eigen::Index>(d);
  pca.components = svd.matrixV().leftCols(k).transpose();
  for (Eigen::Index r = 0; r < k; ++r) {
    Eigen::Index arg = 0;
    pca.components.row(r).cwiseAbs().maxCoeff(&arg);
    if (pca.components(r, arg) < 0) pca.components.row(r) *= -1.0;
  }
  pca.explained_variance =
      svd.singularValues().head(k).array().square() / static_cast<double>(m - 1);
  return pca;
}

Eigen::MatrixXd angle_rescale(const Eigen::MatrixXd& P) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(P.rows(), P.cols());
  for (Eigen::Index c = 0; c < P.cols(); ++c) {
    const double lo = P.col(c).minCoeff();
    const double hi = P.col(c).maxCoeff();
    if (!(hi > lo)) continue;
    out.col(c) = ((P.col(c).array() - lo) / (hi - lo) * 2.0 - 1.0) * std::numbers::pi;
  }
  return out;
}

KernelMatrix fidelity_kernel(const Eigen::MatrixXd& angles, std::vector<std::string> ids,
                             const CircuitConfig& cfg, std::size_t jobs) {
  const auto m = static_cast<std::size_t>(angles.rows());
  if (ids.size() != m) throw Error(ErrorCode::kDimensionMismatch, "one id per row required");
  std::vector<StateVector> states(m, StateVector(cfg.n_qubits));
  parallel_for(m, jobs, [&](std::size_t i) {
    const Eigen::VectorXd theta = angles.row(static_cast<Eigen::Index>(i)).transpose();
    states[i] = ansatz_state(std::span<const double>(theta.data(), static_cast<std::size_t>(theta.size())), cfg);
  });
  KernelMatrix out;
  out.ids = std::move(ids);
  out.K.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i; j < m; ++j) {
      const double f = std::norm(states[i].inner(states[j]));
      out.K(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = f;
      out.K(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = f;
    }
  }
  return out;
}

KernelMatrix encode_and_kernel(const Eigen::MatrixXd& X, std::vector<std::string> ids,
                               const PcaModel& pca, const CircuitConfig& cfg, std::size_t jobs) {
  if (static_cast<std::size_t>(pca.components.rows()) != cfg.n_qubits) {
    throw Error(ErrorCode::kDimensionMismatch, "PCA components must equal the qubit count");
  }
  return fidelity_kernel(angle_rescale(pca.project(X)), std::move(ids), cfg, jobs);
}

double min_eigenvalue(const Eigen::MatrixXd& K) {
  if (K.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

nlohmann::json KernelDiagnostics::to_json() const {
  auto opt = [](const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  return {{"n_pairs", n_pairs},         {"mean", mean},
          {"pearson", opt(pearson)},    {"spearman", opt(spearman)},
          {"min_eigenvalue", min_eigenvalue}, {"histogram", histogram.to_json()},
          {"angle_map", "per-coordinate batch min-max to [-pi, pi]"},
          {"kernel", "fidelity |<psi_i|psi_j>|^2 of ansatz states"}};
}

KernelDiagnostics kernel_diagnostics(const KernelMatrix& K, const Eigen::MatrixXd* reference) {
  const Eigen::Index m = K.K.rows();
  if (reference && (reference->rows() != m || reference->cols() != m)) {
    throw Error(ErrorCode::kDimensionMismatch, "reference matrix shape differs from K");
  }
  std::vector<double> k_vals, r_vals;
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i + 1; j < m; ++j) {
      k_vals.push_back(K.K(i, j));
      if (reference) r_vals.push_back((*reference)(i, j));
    }
  }
  KernelDiagnostics d;
  d.n_pairs = k_vals.size();
  for (double v : k_vals) d.mean += v;
  if (!k_vals.empty()) d.mean /= static_cast<double>(k_vals.size());
  d.min_eigenvalue = min_eigenvalue(K.K);
  d.histogram = make_histogram(k_vals, 20, 0.0, 1.0);
  if (reference) {
    d.pearson = pearson(k_vals, r_vals);
    d.spearman = spearman(k_vals, r_vals);
  }
  return d;
}

void write_kernel_csv(const std::filesystem::path& path, const KernelMatrix& K) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << "id";
  for (const auto& id : K.ids) out << ',' << id;
  out << '\n';
  char buf[40];
  for (Eigen::Index i = 0; i < K.K.rows(); ++i) {
    out << K.ids[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < K.K.cols(); ++j) {
      std::snprintf(buf, sizeof buf, ",%.17g", K.K(i, j));
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace qwb
