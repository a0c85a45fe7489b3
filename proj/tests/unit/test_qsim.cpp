// Copyright 2026 The qwbench Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracle/oracles.hpp"
#include "qwb/error.hpp"
#include "qwb/qsim.hpp"

namespace qwb {
namespace {

constexpr double kPi = std::numbers::pi;

double max_dev(const StateVector& s, const Eigen::VectorXcd& ref) {
  double m = 0;
  for (std::size_t i = 0; i < s.dim(); ++i)
    m = std::max(m, std::abs(s.amplitudes()[i] - ref(static_cast<Eigen::Index>(i))));
  return m;
}

std::vector<double> random_angles(std::mt19937_64& gen, std::size_t n) {
  std::uniform_real_distribution<double> u(-kPi, kPi);
  std::vector<double> t(n);
  for (auto& x : t) x = u(gen);
  return t;
}

TEST(Ansatz, ZeroAnglesGiveGroundState) {
  CircuitConfig cfg;
  cfg.n_qubits = 5;
  const auto s = ansatz_state(std::vector<double>(5, 0.0), cfg);
  EXPECT_EQ(s.amplitudes()[0], Complex(1.0, 0.0));
  for (std::size_t i = 1; i < s.dim(); ++i) EXPECT_EQ(s.amplitudes()[i], Complex(0.0, 0.0));
}

TEST(Ansatz, SingleQubitPiRotation) {
  CircuitConfig cfg;
  cfg.n_qubits = 1;
  cfg.n_layers = 1;
  const auto s = ansatz_state(std::vector<double>{kPi}, cfg);
  // Rz(pi) Ry(pi)|0> = e^{i pi/2}|1>.
  EXPECT_NEAR(std::abs(s.amplitudes()[0]), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(s.amplitudes()[1] - Complex(0.0, 1.0)), 0.0, 1e-12);
}

TEST(Ansatz, WrongThetaLengthRejected) {
  CircuitConfig cfg;
  cfg.n_qubits = 3;
  try {
    ansatz_state(std::vector<double>(2, 0.1), cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kThetaDimension);
  }
}

TEST(Ansatz, MatchesDenseOracle) {
  std::mt19937_64 gen(1);
  for (std::size_t n = 1; n <= 6; ++n) {
    for (std::size_t layers : {1u, 2u, 4u}) {
      CircuitConfig cfg;
      cfg.n_qubits = n;
      cfg.n_layers = layers;
      for (int t = 0; t < 5; ++t) {
        const auto theta = random_angles(gen, n);
        const auto s = ansatz_state(theta, cfg);
        EXPECT_LT(max_dev(s, oracle::ansatz(theta, layers)), 1e-10) << "n=" << n;
        EXPECT_NEAR(s.norm(), 1.0, 1e-9);
      }
    }
  }
}

TEST(ZzMap, MatchesDenseOracle) {
  std::mt19937_64 gen(2);
  for (std::size_t n = 1; n <= 4; ++n) {
    for (std::size_t reps : {1u, 2u}) {
      for (int t = 0; t < 5; ++t) {
        const auto x = random_angles(gen, n);
        const auto s = zz_feature_state(x, n, reps);
        EXPECT_LT(max_dev(s, oracle::zz_map(x, reps)), 1e-10);
        EXPECT_NEAR(s.norm(), 1.0, 1e-9);
      }
    }
    const std::vector<double> zero(n, 0.0);
    EXPECT_LT(max_dev(zz_feature_state(zero, n, 1), oracle::zz_map(zero, 1)), 1e-10);
  }
  EXPECT_THROW(zz_feature_state(std::vector<double>{0.1}, 2, 1), Error);
}

TEST(Observables, EnumerationOrderAndBoundaries) {
  const auto obs = default_observables(12, 64);
  ASSERT_EQ(obs.size(), 64u);
  EXPECT_EQ(obs[0].label(), "Z0");
  EXPECT_EQ(obs[12].label(), "X0");
  EXPECT_EQ(obs[24].label(), "Y0");
  EXPECT_EQ(obs[36].label(), "ZZ(0,1)");
  EXPECT_EQ(obs[47].label(), "ZZ(0,11)");
  EXPECT_EQ(obs[48].label(), "XX(0,1)");
  EXPECT_EQ(obs[60].label(), "YY(0,1)");
  EXPECT_EQ(obs[63].label(), "YY(3,4)");
  const auto singles = default_observables(12, 36);
  for (const auto& t : singles) EXPECT_EQ(t.factors.size(), 1u);
  try {
    default_observables(2, 73);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kObservablePoolExhausted);
  }
  EXPECT_NO_THROW(default_observables(2, 12));
  EXPECT_THROW(default_observables(2, 13), Error);
}

TEST(Expectations, GroundAndPlusStates) {
  const StateVector g(4);
  const auto obs = default_observables(4, 24);
  const auto e = expectations(g, obs);
  for (std::size_t j = 0; j < obs.size(); ++j) {
    const auto& f = obs[j].factors;
    const bool all_z = std::all_of(f.begin(), f.end(), [](auto& p) { return p.second == Pauli::kZ; });
    EXPECT_NEAR(e[j], all_z ? 1.0 : 0.0, 1e-12) << obs[j].label();
  }
  StateVector plus(1);
  plus.apply_h(0);
  const auto p = expectations(plus, default_observables(1, 3));
  EXPECT_NEAR(p[0], 0.0, 1e-12);  // Z
  EXPECT_NEAR(p[1], 1.0, 1e-12);  // X
  EXPECT_NEAR(p[2], 0.0, 1e-12);  // Y
}

TEST(Expectations, AnalyticMatchesDenseOperatorsExhaustively) {
  std::mt19937_64 gen(4);
  for (std::size_t n = 1; n <= 6; ++n) {
    CircuitConfig cfg;
    cfg.n_qubits = n;
    const auto theta = random_angles(gen, n);
    const auto s = ansatz_state(theta, cfg);
    const auto ref = oracle::ansatz(theta, cfg.n_layers);
    const auto obs = default_observables(n, n == 1 ? 3 : 6 * n);
    const auto e = expectations(s, obs);
    for (std::size_t j = 0; j < obs.size(); ++j) {
      std::vector<std::pair<std::size_t, char>> f;
      for (const auto& [q, p] : obs[j].factors) f.emplace_back(q, static_cast<char>(p));
      EXPECT_NEAR(e[j], oracle::pauli_expectation(ref, f, n), 1e-10) << obs[j].label();
      EXPECT_LE(std::abs(e[j]), 1.0);
    }
    // A mixed-letter term goes through the per-qubit rotated distribution.
    PauliTerm mixed{{{0, Pauli::kX}, {n - 1, Pauli::kY}}};
    if (n >= 2) {
      const auto m = expectations(s, {mixed});
      EXPECT_NEAR(m[0], oracle::pauli_expectation(ref, {{0, 'X'}, {n - 1, 'Y'}}, n), 1e-10);
    }
  }
}

TEST(Expectations, SampledWithinBinomialBound) {
  CircuitConfig cfg;
  cfg.n_qubits = 4;
  std::mt19937_64 gen(9);
  const auto s = ansatz_state(random_angles(gen, 4), cfg);
  const auto obs = default_observables(4, 24);
  const auto exact = expectations(s, obs);
  std::size_t ok = 0, total = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto est = expectations(s, obs, 2048, seed);
    for (std::size_t j = 0; j < obs.size(); ++j, ++total) {
      ok += std::abs(est[j] - exact[j]) <= 4.0 / std::sqrt(2048.0);
      EXPECT_LE(std::abs(est[j]), 1.0);
    }
  }
  EXPECT_GE(static_cast<double>(ok), 0.99 * static_cast<double>(total));
  EXPECT_EQ(expectations(s, obs, 64, 3), expectations(s, obs, 64, 3));
}

TEST(AmplitudeState, NormalizesPadsAndTruncates) {
  const auto a = amplitude_state(std::vector<double>{1, 0, 0, 0}, 2);
  EXPECT_EQ(a.amplitudes()[0], Complex(1, 0));
  const auto b = amplitude_state(std::vector<double>{3, 4}, 1);
  EXPECT_NEAR(b.amplitudes()[0].real(), 0.6, 1e-15);
  EXPECT_NEAR(b.amplitudes()[1].real(), 0.8, 1e-15);
  const auto c = amplitude_state(std::vector<double>{1, 2, 3, 4, 5, 6, 7}, 2);
  EXPECT_NEAR(c.amplitudes()[3].real(), 4 / std::sqrt(30.0), 1e-15);
  EXPECT_NEAR(amplitude_state(std::vector<double>{1e-3, -7}, 3).norm(), 1.0, 1e-12);
  try {
    amplitude_state(std::vector<double>{0, 0}, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kZeroVector);
  }
}

TEST(Qks, IdentityEpisodeAndDeterminism) {
  QksEpisode id{Eigen::MatrixXd::Identity(3, 3), Eigen::VectorXd::Zero(3)};
  const std::vector<double> theta{0.3, -1.2, 2.5};
  EXPECT_EQ(qks_apply(theta, id), theta);
  EXPECT_EQ(qks_expand(theta, 4, 17), qks_expand(theta, 4, 17));
  EXPECT_NE(qks_expand(theta, 1, 17), qks_expand(theta, 1, 18));
  for (std::uint64_t seed = 0; seed < 50; ++seed)
    for (const auto& t : qks_expand(theta, 3, seed))
      for (double x : t) {
        EXPECT_GE(x, -kPi);
        EXPECT_LE(x, kPi);
      }
  EXPECT_THROW(qks_expand(theta, 0, 1), Error);
}

TEST(CircuitConfig, Validation) {
  CircuitConfig cfg;
  cfg.n_qubits = 0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg.n_qubits = kMaxQubits + 1;
  EXPECT_THROW(cfg.validate(), Error);
  cfg.n_qubits = 2;
  cfg.n_layers = 0;
  EXPECT_THROW(cfg.validate(), Error);
}

}  // namespace
}  // namespace qwb
