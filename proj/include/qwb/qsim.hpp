// Copyright 2026 The qwbench Authors
// SPDX-License-Identifier: Apache-2.0

// Classical statevector simulation of the feature-map circuits.
//
// Conventions (shared with the dense-matrix oracles in the tests):
//   - qubit q is bit q of the basis index (qubit 0 is least significant);
//   - Ry(phi) = exp(-i phi Y / 2), Rz(phi) = exp(-i phi Z / 2);
//   - P(phi) = diag(1, e^{i phi}); H is the Hadamard; CNOT is standard;
//   - ring pairs are (i, (i + 1) mod n) for i in [0, n) when n >= 2.

#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace qwb {

using Complex = std::complex<double>;
using Gate2x2 = std::array<Complex, 4>;  // row-major {u00, u01, u10, u11}

inline constexpr std::size_t kMaxQubits = 16;

class StateVector {
 public:
  /// |0...0> on n qubits.
  explicit StateVector(std::size_t n_qubits);
  /// Takes ownership of amplitudes; size must be a power of two.
  static StateVector from_amplitudes(std::vector<Complex> amps);

  std::size_t n_qubits() const { return n_qubits_; }
  std::size_t dim() const { return amps_.size(); }
  std::span<const Complex> amplitudes() const { return amps_; }
  double norm() const;

  void apply(std::size_t qubit, const Gate2x2& u);
  void apply_cnot(std::size_t control, std::size_t target);
  void apply_h(std::size_t qubit);
  void apply_ry(std::size_t qubit, double phi);
  void apply_rz(std::size_t qubit, double phi);
  void apply_phase(std::size_t qubit, double phi);

  /// <this|other>
  Complex inner(const StateVector& other) const;

 private:
  StateVector() = default;
  std::size_t n_qubits_ = 0;
  std::vector<Complex> amps_;
};

Gate2x2 gate_h();
Gate2x2 gate_ry(double phi);
Gate2x2 gate_rz(double phi);
Gate2x2 gate_phase(double phi);
Gate2x2 gate_sdg();

std::vector<std::pair<std::size_t, std::size_t>> ring_pairs(std::size_t n_qubits);

struct CircuitConfig {
  std::size_t n_qubits = 12;
  std::size_t n_layers = 4;
  std::size_t shots = 0;  // 0 = analytic
  std::uint64_t seed = 0;

  void validate() const;
};

enum class Pauli : char { kX = 'X', kY = 'Y', kZ = 'Z' };

struct PauliTerm {
  std::vector<std::pair<std::size_t, Pauli>> factors;  // ascending qubit

  std::string label() const;  // e.g. "Z3", "XX(0,1)"
};

using ObservableSet = std::vector<PauliTerm>;

/// Layered hardware-efficient ansatz: per layer l, Ry then Rz on every qubit
/// with angle theta_i / (l + 1), followed by a CNOT ring. Throws
/// Error(kThetaDimension) if theta.size() != n_qubits.
StateVector ansatz_state(std::span<const double> theta, const CircuitConfig& cfg);

/// Z_0..Z_{n-1}, X_*, Y_*, then ZZ, XX, YY over ring pairs, truncated to F.
ObservableSet default_observables(std::size_t n_qubits, std::size_t F);

/// Outcome probabilities after rotating each listed qubit into the
/// measurement basis of its Pauli letter (other qubits are left alone).
std::vector<double> rotated_probabilities(const StateVector& psi,
                                          std::span<const std::pair<std::size_t, Pauli>> basis);

/// Analytic (shots == 0) or shot-sampled expectation values, one per term.
std::vector<double> expectations(const StateVector& psi, const ObservableSet& obs,
                                 std::size_t shots = 0, std::uint64_t seed = 0);

/// Zero-pad or truncate to 2^n and L2-normalize. Throws Error(kZeroVector).
StateVector amplitude_state(std::span<const double> features, std::size_t n_qubits);

/// Second-order Pauli-Z evolution map over ring pairs, `reps` repetitions.
StateVector zz_feature_state(std::span<const double> x, std::size_t n_qubits,
                             std::size_t reps);

struct QksEpisode {
  Eigen::MatrixXd omega;  // d x d
  Eigen::VectorXd beta;   // d
};

/// Seeded random episodes: Gaussian omega (sigma = 1), beta uniform in
/// [-pi, pi).
std::vector<QksEpisode> qks_episodes(std::size_t d, std::size_t episodes,
                                     std::uint64_t seed);

/// clip(omega * theta + beta, -pi, pi)
std::vector<double> qks_apply(std::span<const double> theta, const QksEpisode& episode);

std::vector<std::vector<double>> qks_expand(std::span<const double> theta,
                                            std::size_t episodes, std::uint64_t seed);

}  // namespace qwb
