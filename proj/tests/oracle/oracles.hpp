// Copyright 2026 The qwbench Authors
// SPDX-License-Identifier: Apache-2.0

// Brute-force reference implementations used by the unit and acceptance
// tests. They favour obviousness over speed and share no code with the
// library beyond plain data types.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <set>
#include <string>
#include <vector>

namespace qwb::oracle {

using Cd = std::complex<double>;
using Dense = Eigen::MatrixXcd;

inline Dense kron(const Dense& a, const Dense& b) {
  Dense out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline Dense ry(double phi) {
  Dense m(2, 2);
  m << std::cos(phi / 2), -std::sin(phi / 2), std::sin(phi / 2), std::cos(phi / 2);
  return m;
}

inline Dense rz(double phi) {
  Dense m = Dense::Zero(2, 2);
  m(0, 0) = std::polar(1.0, -phi / 2);
  m(1, 1) = std::polar(1.0, phi / 2);
  return m;
}

inline Dense hadamard() {
  Dense m(2, 2);
  const double r = 1.0 / std::sqrt(2.0);
  m << r, r, r, -r;
  return m;
}

inline Dense phase(double phi) {
  Dense m = Dense::Identity(2, 2);
  m(1, 1) = std::polar(1.0, phi);
  return m;
}

/// Full 2^n operator of a one-qubit gate. Qubit q is bit q of the basis
/// index, so the Kronecker chain runs from qubit n-1 down to qubit 0.
inline Dense lift(const Dense& u, std::size_t q, std::size_t n) {
  Dense out = Dense::Identity(1, 1);
  for (std::size_t k = n; k-- > 0;) out = kron(out, k == q ? u : Dense::Identity(2, 2));
  return out;
}

/// Full 2^n CNOT as an explicit permutation matrix.
inline Dense cnot(std::size_t control, std::size_t target, std::size_t n) {
  const std::size_t dim = std::size_t{1} << n;
  Dense out = Dense::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < dim; ++i) {
    const bool c = (i >> control) & 1U;
    const std::size_t j = c ? (i ^ (std::size_t{1} << target)) : i;
    out(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = 1.0;
  }
  return out;
}

inline Eigen::VectorXcd zero_state(std::size_t n) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(Eigen::Index{1} << n);
  v(0) = 1.0;
  return v;
}

inline std::vector<std::pair<std::size_t, std::size_t>> ring(std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> r;
  if (n >= 2)
    for (std::size_t i = 0; i < n; ++i) r.emplace_back(i, (i + 1) % n);
  return r;
}

inline Eigen::VectorXcd ansatz(const std::vector<double>& theta, std::size_t layers) {
  const std::size_t n = theta.size();
  const Eigen::Index dim = Eigen::Index{1} << n;
  Dense U = Dense::Identity(dim, dim);
  for (std::size_t l = 0; l < layers; ++l) {
    const double s = 1.0 / static_cast<double>(l + 1);
    for (std::size_t q = 0; q < n; ++q) {
      U = lift(ry(theta[q] * s), q, n) * U;
      U = lift(rz(theta[q] * s), q, n) * U;
    }
    for (const auto& [c, t] : ring(n)) U = cnot(c, t, n) * U;
  }
  return U * zero_state(n);
}

inline Eigen::VectorXcd zz_map(const std::vector<double>& x, std::size_t reps) {
  const double pi = std::numbers::pi;
  const std::size_t n = x.size();
  const Eigen::Index dim = Eigen::Index{1} << n;
  Dense U = Dense::Identity(dim, dim);
  for (std::size_t r = 0; r < reps; ++r) {
    for (std::size_t q = 0; q < n; ++q) U = lift(hadamard(), q, n) * U;
    for (std::size_t q = 0; q < n; ++q) U = lift(phase(2 * x[q]), q, n) * U;
    for (const auto& [i, j] : ring(n)) {
      U = cnot(i, j, n) * U;
      U = lift(phase(2 * (pi - x[i]) * (pi - x[j])), j, n) * U;
      U = cnot(i, j, n) * U;
    }
  }
  return U * zero_state(n);
}

/// <psi|P|psi> with P built densely from Pauli matrices.
inline double pauli_expectation(const Eigen::VectorXcd& psi,
                                const std::vector<std::pair<std::size_t, char>>& factors,
                                std::size_t n) {
  const Eigen::Index dim = Eigen::Index{1} << n;
  Dense P = Dense::Identity(dim, dim);
  for (const auto& [q, p] : factors) {
    Dense m(2, 2);
    if (p == 'X') m << 0, 1, 1, 0;
    if (p == 'Y') m << 0, Cd(0, -1), Cd(0, 1), 0;
    if (p == 'Z') m << 1, 0, 0, -1;
    P = lift(m, q, n) * P;
  }
  return (psi.adjoint() * P * psi)(0).real();
}

/// Full-scan Okapi BM25. Each unit is scored independently against the
/// whole collection; units sharing no query term are omitted.
struct NaiveBm25 {
  std::vector<std::string> ids;
  std::vector<std::vector<std::string>> docs;
  double k1 = 1.2;
  double b = 0.75;

  std::vector<std::pair<std::string, double>> rank(const std::vector<std::string>& query) const {
    const double N = static_cast<double>(docs.size());
    double avg = 0;
    for (const auto& d : docs) avg += static_cast<double>(d.size());
    avg /= N;
    const std::set<std::string> terms(query.begin(), query.end());
    std::vector<std::pair<std::string, double>> out;
    for (std::size_t i = 0; i < docs.size(); ++i) {
      double s = 0;
      bool hit = false;
      for (const auto& t : terms) {
        const double tf = static_cast<double>(std::count(docs[i].begin(), docs[i].end(), t));
        if (tf == 0) continue;
        hit = true;
        double df = 0;
        for (const auto& d : docs) df += std::find(d.begin(), d.end(), t) != d.end() ? 1 : 0;
        const double idf = std::log(1 + (N - df + 0.5) / (df + 0.5));
        const double len = static_cast<double>(docs[i].size());
        s += idf * tf * (k1 + 1) / (tf + k1 * (1 - b + b * len / avg));
      }
      if (hit) out.emplace_back(ids[i], s);
    }
    std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
      return x.second != y.second ? x.second > y.second : x.first < y.first;
    });
    return out;
  }
};

/// Single-relevance metrics computed straight from their definitions.
struct NaiveMetrics {
  double hit1 = 0, hit3 = 0, hit5 = 0, hit10 = 0, mrr = 0, ndcg = 0, map = 0;
};

inline NaiveMetrics naive_metrics(const std::map<std::string, std::vector<std::string>>& runs,
                                  const std::map<std::string, std::string>& rel) {
  NaiveMetrics m;
  for (const auto& [qid, relevant] : rel) {
    const auto& ranked = runs.at(qid);
    std::size_t pos = 0;
    for (std::size_t i = 0; i < ranked.size() && i < 10; ++i)
      if (ranked[i] == relevant) {
        pos = i + 1;
        break;
      }
    if (pos == 0) continue;
    m.hit1 += pos <= 1;
    m.hit3 += pos <= 3;
    m.hit5 += pos <= 5;
    m.hit10 += 1;
    m.mrr += 1.0 / static_cast<double>(pos);
    // Ideal DCG is 1 with a single relevant unit.
    m.ndcg += 1.0 / std::log2(static_cast<double>(pos) + 1);
    // Average precision: precision at the only relevant position.
    m.map += 1.0 / static_cast<double>(pos);
  }
  const double n = static_cast<double>(rel.size());
  for (double* v : {&m.hit1, &m.hit3, &m.hit5, &m.hit10, &m.mrr, &m.ndcg, &m.map}) *v /= n;
  return m;
}

}  // namespace qwb::oracle
