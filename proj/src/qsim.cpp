// Copyright 2026 The qwbench Authors
// SPDX-License-Identifier: Apache-2.0

#include "qwb/qsim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numbers>

#include "qwb/error.hpp"
#include "qwb/hashing.hpp"

namespace qwb {

namespace {

constexpr double kPi = std::numbers::pi;

void check_qubits(std::size_t n) {
  if (n < 1 || n > kMaxQubits) {
    throw Error(ErrorCode::kInvalidConfig,
                "n_qubits must be in [1, " + std::to_string(kMaxQubits) + "]");
  }
}

}  // namespace

StateVector::StateVector(std::size_t n_qubits) : n_qubits_(n_qubits) {
  check_qubits(n_qubits);
  amps_.assign(std::size_t{1} << n_qubits, Complex{0.0, 0.0});
  amps_[0] = {1.0, 0.0};
}

StateVector StateVector::from_amplitudes(std::vector<Complex> amps) {
  if (amps.empty() || !std::has_single_bit(amps.size())) {
    throw Error(ErrorCode::kDimensionMismatch, "amplitude count must be a power of two");
  }
  StateVector s;
  s.n_qubits_ = static_cast<std::size_t>(std::countr_zero(amps.size()));
  s.amps_ = std::move(amps);
  return s;
}

double StateVector::norm() const {
  double acc = 0.0;
  for (const auto& a : amps_) acc += std::norm(a);
  return std::sqrt(acc);
}

void StateVector::apply(std::size_t qubit, const Gate2x2& u) {
  const std::size_t mask = std::size_t{1} << qubit;
  for (std::size_t i = 0; i < amps_.size(); ++i) {
    if (i & mask) continue;
    const std::size_t j = i | mask;
    const Complex a0 = amps_[i];
    const Complex a1 = amps_[j];
    amps_[i] = u[0] * a0 + u[1] * a1;
    amps_[j] = u[2] * a0 + u[3] * a1;
  }
}

void StateVector::apply_cnot(std::size_t control, std::size_t target) {
  if (control == target) return;
  const std::size_t cm = std::size_t{1} << control;
  const std::size_t tm = std::size_t{1} << target;
  for (std::size_t i = 0; i < amps_.size(); ++i) {
    if ((i & cm) && !(i & tm)) std::swap(amps_[i], amps_[i | tm]);
  }
}

void StateVector::apply_h(std::size_t qubit) { apply(qubit, gate_h()); }
void StateVector::apply_ry(std::size_t qubit, double phi) { apply(qubit, gate_ry(phi)); }
void StateVector::apply_rz(std::size_t qubit, double phi) { apply(qubit, gate_rz(phi)); }

void StateVector::apply_phase(std::size_t qubit, double phi) {
  const std::size_t mask = std::size_t{1} << qubit;
  const Complex w = std::polar(1.0, phi);
  for (std::size_t i = 0; i < amps_.size(); ++i) {
    if (i & mask) amps_[i] *= w;
  }
}

Complex StateVector::inner(const StateVector& other) const {
  if (other.dim() != dim()) throw Error(ErrorCode::kDimensionMismatch, "state size mismatch");
  Complex acc{0.0, 0.0};
  for (std::size_t i = 0; i < amps_.size(); ++i) acc += std::conj(amps_[i]) * other.amps_[i];
  return acc;
}

Gate2x2 gate_h() {
  const double r = 1.0 / std::sqrt(2.0);
  return {Complex{r, 0}, Complex{r, 0}, Complex{r, 0}, Complex{-r, 0}};
}

Gate2x2 gate_ry(double phi) {
  const double c = std::cos(phi / 2), s = std::sin(phi / 2);
  return {Complex{c, 0}, Complex{-s, 0}, Complex{s, 0}, Complex{c, 0}};
}

Gate2x2 gate_rz(double phi) {
  return {std::polar(1.0, -phi / 2), Complex{0, 0}, Complex{0, 0}, std::polar(1.0, phi / 2)};
}

Gate2x2 gate_phase(double phi) {
  return {Complex{1, 0}, Complex{0, 0}, Complex{0, 0}, std::polar(1.0, phi)};
}

Gate2x2 gate_sdg() { return {Complex{1, 0}, Complex{0, 0}, Complex{0, 0}, Complex{0, -1}}; }

std::vector<std::pair<std::size_t, std::size_t>> ring_pairs(std::size_t n_qubits) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (n_qubits < 2) return pairs;
  for (std::size_t i = 0; i < n_qubits; ++i) pairs.emplace_back(i, (i + 1) % n_qubits);
  return pairs;
}

void CircuitConfig::validate() const {
  check_qubits(n_qubits);
  if (n_layers < 1) throw Error(ErrorCode::kInvalidConfig, "n_layers must be >= 1");
}

std::string PauliTerm::label() const {
  std::string letters, qubits;
  for (const auto& [q, p] : factors) {
    letters.push_back(static_cast<char>(p));
    if (!qubits.empty()) qubits.push_back(',');
    qubits += std::to_string(q);
  }
  return factors.size() == 1 ? letters + qubits : letters + "(" + qubits + ")";
}

StateVector ansatz_state(std::span<const double> theta, const CircuitConfig& cfg) {
  cfg.validate();
  if (theta.size() != cfg.n_qubits) {
    throw Error(ErrorCode::kThetaDimension,
                "theta has " + std::to_string(theta.size()) + " entries, circuit has " +
                    std::to_string(cfg.n_qubits) + " qubits");
  }
  StateVector psi(cfg.n_qubits);
  const auto ring = ring_pairs(cfg.n_qubits);
  for (std::size_t layer = 0; layer < cfg.n_layers; ++layer) {
    const double scale = 1.0 / static_cast<double>(layer + 1);
    for (std::size_t q = 0; q < cfg.n_qubits; ++q) {
      psi.apply_ry(q, theta[q] * scale);
      psi.apply_rz(q, theta[q] * scale);
    }
    for (const auto& [c, t] : ring) psi.apply_cnot(c, t);
  }
  return psi;
}

ObservableSet default_observables(std::size_t n_qubits, std::size_t F) {
  check_qubits(n_qubits);
  ObservableSet pool;
  for (Pauli p : {Pauli::kZ, Pauli::kX, Pauli::kY})
    for (std::size_t q = 0; q < n_qubits; ++q) pool.push_back({{{q, p}}});
  const auto ring = ring_pairs(n_qubits);
  for (Pauli p : {Pauli::kZ, Pauli::kX, Pauli::kY}) {
    for (const auto& [a, b] : ring) {
      PauliTerm term{{{std::min(a, b), p}, {std::max(a, b), p}}};
      pool.push_back(std::move(term));
    }
  }
  if (F > pool.size()) {
    throw Error(ErrorCode::kObservablePoolExhausted,
                "requested " + std::to_string(F) + " observables, pool has " +
                    std::to_string(pool.size()));
  }
  pool.resize(F);
  return pool;
}

std::vector<double> rotated_probabilities(
    const StateVector& psi, std::span<const std::pair<std::size_t, Pauli>> basis) {
  bool identity = true;
  for (const auto& [q, p] : basis) identity = identity && p == Pauli::kZ;
  std::vector<double> probs(psi.dim());
  if (identity) {
    for (std::size_t i = 0; i < psi.dim(); ++i) probs[i] = std::norm(psi.amplitudes()[i]);
    return probs;
  }
  StateVector rotated = psi;
  for (const auto& [q, p] : basis) {
    if (p == Pauli::kY) rotated.apply(q, gate_sdg());
    if (p != Pauli::kZ) rotated.apply_h(q);
  }
  for (std::size_t i = 0; i < psi.dim(); ++i) probs[i] = std::norm(rotated.amplitudes()[i]);
  return probs;
}

namespace {

std::size_t term_mask(const PauliTerm& term) {
  std::size_t mask = 0;
  for (const auto& [q, p] : term.factors) mask |= std::size_t{1} << q;
  return mask;
}

// Terms whose factors all use one letter can be measured from the
// distribution with every qubit rotated into that letter's basis: rotations
// on other qubits do not change the marginal of the measured ones.
std::string basis_key(const PauliTerm& term, std::size_t n) {
  const Pauli first = term.factors.front().second;
  bool uniform = true;
  for (const auto& f : term.factors) uniform = uniform && f.second == first;
  if (uniform) return std::string(1, static_cast<char>(first));
  std::string key(n, 'Z');
  for (const auto& [q, p] : term.factors) key[q] = static_cast<char>(p);
  return key;
}

std::vector<std::pair<std::size_t, Pauli>> basis_from_key(const std::string& key,
                                                          std::size_t n) {
  std::vector<std::pair<std::size_t, Pauli>> basis;
  for (std::size_t q = 0; q < n; ++q) {
    const char c = key.size() == 1 ? key[0] : key[q];
    basis.emplace_back(q, static_cast<Pauli>(c));
  }
  return basis;
}

double parity_sign(std::size_t index, std::size_t mask) {
  return (std::popcount(index & mask) & 1) ? -1.0 : 1.0;
}

}  // namespace

std::vector<double> expectations(const StateVector& psi, const ObservableSet& obs,
                                 std::size_t shots, std::uint64_t seed) {
  const std::size_t n = psi.n_qubits();
  std::map<std::string, std::vector<double>> distributions;
  std::map<std::string, std::vector<double>> cdfs;
  auto distribution = [&](const std::string& key) -> const std::vector<double>& {
    auto it = distributions.find(key);
    if (it == distributions.end()) {
      const auto basis = basis_from_key(key, n);
      it = distributions.emplace(key, rotated_probabilities(psi, basis)).first;
    }
    return it->second;
  };

  Rng rng(seed);
  std::vector<double> out;
  out.reserve(obs.size());
  for (const auto& term : obs) {
    for (const auto& f : term.factors) {
      if (f.first >= n) throw Error(ErrorCode::kDimensionMismatch, "observable qubit out of range");
    }
    const std::string key = basis_key(term, n);
    const auto& probs = distribution(key);
    const std::size_t mask = term_mask(term);
    if (shots == 0) {
      double acc = 0.0;
      for (std::size_t i = 0; i < probs.size(); ++i) acc += probs[i] * parity_sign(i, mask);
      out.push_back(std::clamp(acc, -1.0, 1.0));
      continue;
    }
    auto cit = cdfs.find(key);
    if (cit == cdfs.end()) {
      std::vector<double> cdf(probs.size());
      double run = 0.0;
      for (std::size_t i = 0; i < probs.size(); ++i) cdf[i] = (run += probs[i]);
      cit = cdfs.emplace(key, std::move(cdf)).first;
    }
    const auto& cdf = cit->second;
    const double total = cdf.back();
    double acc = 0.0;
    for (std::size_t s = 0; s < shots; ++s) {
      const double u = rng.uniform() * total;
      auto pos = std::upper_bound(cdf.begin(), cdf.end(), u);
      if (pos == cdf.end()) --pos;
      acc += parity_sign(static_cast<std::size_t>(pos - cdf.begin()), mask);
    }
    out.push_back(acc / static_cast<double>(shots));
  }
  return out;
}

StateVector amplitude_state(std::span<const double> features, std::size_t n_qubits) {
  check_qubits(n_qubits);
  const std::size_t dim = std::size_t{1} << n_qubits;
  std::vector<Complex> amps(dim, Complex{0, 0});
  double norm2 = 0.0;
  for (std::size_t i = 0; i < std::min(dim, features.size()); ++i) {
    amps[i] = {features[i], 0.0};
    norm2 += features[i] * features[i];
  }
  if (!(norm2 > 0.0)) {
    throw Error(ErrorCode::kZeroVector, "amplitude encoding of an all-zero vector");
  }
  const double inv = 1.0 / std::sqrt(norm2);
  for (auto& a : amps) a *= inv;
  return StateVector::from_amplitudes(std::move(amps));
}

StateVector zz_feature_state(std::span<const double> x, std::size_t n_qubits,
                             std::size_t reps) {
  check_qubits(n_qubits);
  if (x.size() != n_qubits) {
    throw Error(ErrorCode::kDimensionMismatch,
                "zz feature map needs one value per qubit");
  }
  StateVector psi(n_qubits);
  const auto ring = ring_pairs(n_qubits);
  for (std::size_t r = 0; r < reps; ++r) {
    for (std::size_t q = 0; q < n_qubits; ++q) psi.apply_h(q);
    for (std::size_t q = 0; q < n_qubits; ++q) psi.apply_phase(q, 2.0 * x[q]);
    for (const auto& [i, j] : ring) {
      psi.apply_cnot(i, j);
      psi.apply_phase(j, 2.0 * (kPi - x[i]) * (kPi - x[j]));
      psi.apply_cnot(i, j);
    }
  }
  return psi;
}

std::vector<QksEpisode> qks_episodes(std::size_t d, std::size_t episodes,
                                     std::uint64_t seed) {
  Rng rng(mix64(seed ^ 0x9c5ULL));
  std::vector<QksEpisode> out(episodes);
  const auto dd = static_cast<Eigen::Index>(d);
  for (auto& e : out) {
    e.omega.resize(dd, dd);
    for (Eigen::Index r = 0; r < dd; ++r)
      for (Eigen::Index c = 0; c < dd; ++c) e.omega(r, c) = rng.normal();
    e.beta.resize(dd);
    for (Eigen::Index r = 0; r < dd; ++r) e.beta[r] = rng.uniform(-kPi, kPi);
  }
  return out;
}

std::vector<double> qks_apply(std::span<const double> theta, const QksEpisode& episode) {
  const auto d = static_cast<Eigen::Index>(theta.size());
  if (episode.omega.rows() != d || episode.omega.cols() != d || episode.beta.size() != d) {
    throw Error(ErrorCode::kDimensionMismatch, "qks episode shape mismatch");
  }
  const Eigen::Map<const Eigen::VectorXd> t(theta.data(), d);
  const Eigen::VectorXd y = episode.omega * t + episode.beta;
  std::vector<double> out(theta.size());
  for (Eigen::Index i = 0; i < d; ++i) {
    out[static_cast<std::size_t>(i)] = std::clamp(y[i], -kPi, kPi);
  }
  return out;
}

std::vector<std::vector<double>> qks_expand(std::span<const double> theta,
                                            std::size_t episodes, std::uint64_t seed) {
  if (episodes < 1) throw Error(ErrorCode::kInvalidConfig, "qks episodes must be >= 1");
  std::vector<std::vector<double>> out;
  for (const auto& e : qks_episodes(theta.size(), episodes, seed)) {
    out.push_back(qks_apply(theta, e));
  }
  return out;
}

}  // namespace qwb
