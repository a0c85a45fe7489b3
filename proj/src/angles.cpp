// Copyright 2026 The qwbench Authors
// SPDX-License-Identifier: Apache-2.0

#include "qwb/angles.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

#include "binio.hpp"
#include "json.hpp"
#include "qwb/error.hpp"
#include "qwb/hashing.hpp"

namespace qwb {

std::string_view to_string(AxisScaling scaling) {
  switch (scaling) {
    case AxisScaling::kU: return "u";
    case AxisScaling::kUSigma: return "u_sigma";
    case AxisScaling::kUSqrtSigma: return "u_sqrt_sigma";
  }
  return "u_sqrt_sigma";
}

AxisScaling axis_scaling_from_string(std::string_view name) {
  if (name == "u") return AxisScaling::kU;
  if (name == "u_sigma") return AxisScaling::kUSigma;
  if (name == "u_sqrt_sigma") return AxisScaling::kUSqrtSigma;
  throw Error(ErrorCode::kInvalidConfig, "unknown axis scaling: " + std::string(name));
}

std::string_view to_string(AngleSource source) {
  return source == AngleSource::kEig ? "eig" : "lexical_fallback";
}

std::vector<std::string> build_vocabulary(std::span<const TokenSeq> units) {
  std::set<std::string> terms;
  for (const auto& u : units) terms.insert(u.tokens.begin(), u.tokens.end());
  return {terms.begin(), terms.end()};
}

Eigen::SparseMatrix<double> cooccurrence_counts(
    std::span<const TokenSeq> units,
    const std::unordered_map<std::string, std::size_t>& vocab, std::size_t context) {
  std::vector<Eigen::Triplet<double>> triplets;
  for (const auto& unit : units) {
    std::vector<Eigen::Index> ids;
    ids.reserve(unit.size());
    for (const auto& t : unit.tokens) {
      auto it = vocab.find(t);
      ids.push_back(it == vocab.end() ? -1 : static_cast<Eigen::Index>(it->second));
    }
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (ids[i] < 0) continue;
      const std::size_t stop = std::min(ids.size(), i + context + 1);
      for (std::size_t j = i + 1; j < stop; ++j) {
        if (ids[j] < 0) continue;
        triplets.emplace_back(ids[i], ids[j], 1.0);
        triplets.emplace_back(ids[j], ids[i], 1.0);
      }
    }
  }
  const auto V = static_cast<Eigen::Index>(vocab.size());
  Eigen::SparseMatrix<double> C(V, V);
  C.setFromTriplets(triplets.begin(), triplets.end());  // duplicates are summed
  return C;
}

namespace {

void fix_signs(Eigen::MatrixXd& U) {
  for (Eigen::Index c = 0; c < U.cols(); ++c) {
    Eigen::Index best = 0;
    U.col(c).cwiseAbs().maxCoeff(&best);
    if (U(best, c) < 0) U.col(c) *= -1.0;
  }
}

Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& Y) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(Y);
  return qr.householderQ() * Eigen::MatrixXd::Identity(Y.rows(), Y.cols());
}

// Randomized range finder with subspace (power) iterations.
TruncatedSvd randomized_svd(const Eigen::SparseMatrix<double>& C, std::size_t rank) {
  const Eigen::Index V = C.rows();
  const Eigen::Index width = std::min<Eigen::Index>(V, static_cast<Eigen::Index>(rank) + 20);
  Rng rng(0x5eedULL);
  Eigen::MatrixXd omega(C.cols(), width);
  for (Eigen::Index j = 0; j < width; ++j)
    for (Eigen::Index i = 0; i < C.cols(); ++i) omega(i, j) = rng.normal();
  Eigen::MatrixXd Q = orthonormal_basis(C * omega);
  for (int it = 0; it < 10; ++it) {
    Eigen::MatrixXd Z = orthonormal_basis(C.transpose() * Q);
    Q = orthonormal_basis(C * Z);
  }
  const Eigen::MatrixXd B = (C.transpose() * Q).transpose();  // width x V
  Eigen::BDCSVD<Eigen::MatrixXd> svd(B, Eigen::ComputeThinU);
  TruncatedSvd out;
  out.U = (Q * svd.matrixU()).leftCols(static_cast<Eigen::Index>(rank));
  out.singular = svd.singularValues().head(static_cast<Eigen::Index>(rank));
  return out;
}

}  // namespace

TruncatedSvd truncated_svd(const Eigen::SparseMatrix<double>& C, std::size_t rank,
                           std::size_t dense_limit) {
  const auto r = static_cast<Eigen::Index>(rank);
  if (r > std::min(C.rows(), C.cols())) {
    throw Error(ErrorCode::kAxesRankDeficient, "requested rank exceeds matrix size");
  }
  TruncatedSvd out;
  if (static_cast<std::size_t>(C.rows()) <= dense_limit) {
    const Eigen::MatrixXd dense(C);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(dense, Eigen::ComputeThinU);
    out.U = svd.matrixU().leftCols(r);
    out.singular = svd.singularValues().head(r);
  } else {
    out = randomized_svd(C, rank);
  }
  fix_signs(out.U);
  return out;
}

SemanticAxes build_axes(std::span<const TokenSeq> units, const AxesOptions& opts) {
  if (opts.d_max == 0) throw Error(ErrorCode::kInvalidConfig, "d_max must be positive");
  if (opts.context == 0) throw Error(ErrorCode::kInvalidConfig, "context must be positive");
  SemanticAxes axes;
  axes.terms = build_vocabulary(units);
  if (axes.terms.size() < opts.d_max) {
    throw Error(ErrorCode::kAxesRankDeficient,
                "vocabulary of " + std::to_string(axes.terms.size()) +
                    " tokens is smaller than d_max=" + std::to_string(opts.d_max));
  }
  for (std::size_t i = 0; i < axes.terms.size(); ++i) axes.vocab.emplace(axes.terms[i], i);

  Eigen::SparseMatrix<double> C = cooccurrence_counts(units, axes.vocab, opts.context);
  for (Eigen::Index k = 0; k < C.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(C, k); it; ++it)
      it.valueRef() = std::log1p(it.value());

  const TruncatedSvd svd = truncated_svd(C, opts.d_max, opts.dense_svd_limit);
  axes.singular_values = svd.singular;
  switch (opts.scaling) {
    case AxisScaling::kU: axes.E = svd.U; break;
    case AxisScaling::kUSigma: axes.E = svd.U * svd.singular.asDiagonal(); break;
    case AxisScaling::kUSqrtSigma:
      axes.E = svd.U * svd.singular.cwiseSqrt().asDiagonal();
      break;
  }
  axes.mu = axes.E.colwise().mean().transpose();
  axes.sigma = ((axes.E.rowwise() - axes.mu.transpose()).array().square().colwise().mean())
                   .sqrt()
                   .transpose();
  axes.gamma = opts.gamma;
  axes.epsilon = opts.epsilon;
  axes.scaling = opts.scaling;
  return axes;
}

AngleVector eig_angles(std::span<const std::string> tokens, const SemanticAxes& axes,
                       std::size_t d) {
  if (d > axes.d_max()) {
    throw Error(ErrorCode::kDimensionMismatch, "d exceeds the axes' d_max");
  }
  Eigen::VectorXd v = Eigen::VectorXd::Zero(axes.E.cols());
  std::size_t hits = 0;
  for (const auto& t : tokens) {
    auto it = axes.vocab.find(t);
    if (it == axes.vocab.end()) continue;
    v += axes.E.row(static_cast<Eigen::Index>(it->second)).transpose();
    ++hits;
  }
  if (hits == 0) return lexical_angles(tokens, d);
  v /= static_cast<double>(hits);
  AngleVector out;
  out.source = AngleSource::kEig;
  out.theta.resize(d);
  for (std::size_t j = 0; j < d; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    const double z = (v[jj] - axes.mu[jj]) / (axes.sigma[jj] + axes.epsilon);
    out.theta[j] = std::clamp(axes.gamma * z, -std::numbers::pi, std::numbers::pi);
  }
  return out;
}

AngleVector lexical_angles(std::span<const std::string> tokens, std::size_t d) {
  AngleVector out;
  out.source = AngleSource::kLexicalFallback;
  out.theta.assign(d, 0.0);
  if (tokens.empty()) return out;
  for (std::size_t j = 0; j < d; ++j) {
    double acc = 0.0;
    for (const auto& t : tokens) {
      const double unit = static_cast<double>(stable_hash64(t, j) >> 11) * 0x1.0p-53;
      acc += 2.0 * unit - 1.0;
    }
    out.theta[j] = std::numbers::pi * acc / static_cast<double>(tokens.size());
  }
  return out;
}

AngleVector window_angles(std::span<const std::string> tokens, const SemanticAxes* axes,
                          std::size_t d) {
  return axes ? eig_angles(tokens, *axes, d) : lexical_angles(tokens, d);
}

namespace {
constexpr char kAxesMagic[9] = "QWBAXES1";
}

void save_axes(const std::filesystem::path& path, const SemanticAxes& axes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  binio::put_magic(out, kAxesMagic);
  binio::put<std::uint64_t>(out, axes.vocab_size());
  binio::put<std::uint64_t>(out, axes.d_max());
  binio::put<double>(out, axes.gamma);
  binio::put<double>(out, axes.epsilon);
  binio::put<std::uint32_t>(out, static_cast<std::uint32_t>(axes.scaling));
  for (const auto& t : axes.terms) binio::put_string(out, t);
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows = axes.E;
  binio::put_array(out, rows.data(), static_cast<std::size_t>(rows.size()));
  binio::put_array(out, axes.mu.data(), axes.d_max());
  binio::put_array(out, axes.sigma.data(), axes.d_max());
  binio::put_array(out, axes.singular_values.data(), axes.d_max());
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

SemanticAxes load_axes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  binio::expect_magic(in, kAxesMagic);
  SemanticAxes axes;
  const auto V = binio::get<std::uint64_t>(in);
  const auto d = static_cast<Eigen::Index>(binio::get<std::uint64_t>(in));
  axes.gamma = binio::get<double>(in);
  axes.epsilon = binio::get<double>(in);
  axes.scaling = static_cast<AxisScaling>(binio::get<std::uint32_t>(in));
  axes.terms.reserve(V);
  for (std::uint64_t i = 0; i < V; ++i) {
    axes.terms.push_back(binio::get_string(in));
    axes.vocab.emplace(axes.terms.back(), i);
  }
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows(
      static_cast<Eigen::Index>(V), d);
  binio::get_array(in, rows.data(), static_cast<std::size_t>(rows.size()));
  axes.E = rows;
  axes.mu.resize(d);
  axes.sigma.resize(d);
  axes.singular_values.resize(d);
  binio::get_array(in, axes.mu.data(), static_cast<std::size_t>(d));
  binio::get_array(in, axes.sigma.data(), static_cast<std::size_t>(d));
  binio::get_array(in, axes.singular_values.data(), static_cast<std::size_t>(d));
  return axes;
}

void export_axes_json(const std::filesystem::path& path, const SemanticAxes& axes) {
  nlohmann::json j;
  j["vocab_size"] = axes.vocab_size();
  j["d_max"] = axes.d_max();
  j["gamma"] = axes.gamma;
  j["epsilon"] = axes.epsilon;
  j["scaling"] = to_string(axes.scaling);
  j["mu"] = std::vector<double>(axes.mu.data(), axes.mu.data() + axes.mu.size());
  j["sigma"] = std::vector<double>(axes.sigma.data(), axes.sigma.data() + axes.sigma.size());
  j["singular_values"] = std::vector<double>(
      axes.singular_values.data(), axes.singular_values.data() + axes.singular_values.size());
  nlohmann::json rows = nlohmann::json::object();
  for (std::size_t i = 0; i < axes.terms.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    std::vector<double> row(static_cast<std::size_t>(axes.E.cols()));
    for (Eigen::Index c = 0; c < axes.E.cols(); ++c) row[static_cast<std::size_t>(c)] = axes.E(r, c);
    rows[axes.terms[i]] = row;
  }
  j["rows"] = std::move(rows);
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace qwb
