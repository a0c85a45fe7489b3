// Copyright 2026 The qwbench Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <filesystem>
#include <numbers>
#include <random>

#include "qwb/angles.hpp"
#include "qwb/error.hpp"

namespace qwb {
namespace {

constexpr double kPi = std::numbers::pi;

SemanticAxes hand_axes() {
  SemanticAxes a;
  a.terms = {"x", "y", "z"};
  for (std::size_t i = 0; i < a.terms.size(); ++i) a.vocab[a.terms[i]] = i;
  a.E.resize(3, 2);
  a.E << 1.0, 0.0, 0.0, 2.0, 2.0, -2.0;
  a.mu = a.E.colwise().mean().transpose();
  a.sigma = ((a.E.rowwise() - a.mu.transpose()).array().square().colwise().mean()).sqrt().transpose();
  return a;
}

TEST(BuildAxes, SingleTokenCorpusIsRankDeficient) {
  std::vector<TokenSeq> units{tokenize("a a a a a a")};
  AxesOptions opts;
  opts.d_max = 2;
  try {
    build_axes(units, opts);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kAxesRankDeficient);
  }
}

TEST(BuildAxes, TwoTokenSpectrumMatchesDenseOracle) {
  std::vector<TokenSeq> units{tokenize("a b a b")};
  AxesOptions opts;
  opts.d_max = 2;
  const auto axes = build_axes(units, opts);
  // Independent count matrix: symmetric pairs within the context window.
  Eigen::Matrix2d C = Eigen::Matrix2d::Zero();
  const std::vector<int> seq{0, 1, 0, 1};
  for (std::size_t i = 0; i < seq.size(); ++i)
    for (std::size_t j = i + 1; j < seq.size() && j <= i + opts.context; ++j) {
      C(seq[i], seq[j]) += 1;
      C(seq[j], seq[i]) += 1;
    }
  C = C.array().log1p().matrix();
  Eigen::JacobiSVD<Eigen::Matrix2d> svd(C, Eigen::ComputeFullU);
  EXPECT_NEAR(axes.singular_values[0], svd.singularValues()[0], 1e-12);
  EXPECT_NEAR(axes.singular_values[1], svd.singularValues()[1], 1e-12);
  // E = U S^(1/2) gives E E^T = U S U^T, the positive polar factor of C.
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(C);
  const Eigen::Matrix2d polar =
      eig.eigenvectors() * eig.eigenvalues().cwiseAbs().asDiagonal() * eig.eigenvectors().transpose();
  EXPECT_LT((axes.E * axes.E.transpose() - polar).cwiseAbs().maxCoeff(), 1e-12);
  if (eig.eigenvalues().minCoeff() >= 0) {
    EXPECT_LT((axes.E * axes.E.transpose() - C).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(BuildAxes, ColumnsOfUOrthonormal) {
  std::mt19937 gen(3);
  std::vector<TokenSeq> units;
  for (int u = 0; u < 20; ++u) {
    std::string s;
    for (int i = 0; i < 80; ++i) s += "t" + std::to_string(gen() % 60) + " ";
    units.push_back(tokenize(s));
  }
  AxesOptions opts;
  opts.scaling = AxisScaling::kU;
  const auto axes = build_axes(units, opts);
  const Eigen::MatrixXd G = axes.E.transpose() * axes.E;
  EXPECT_LT((G - Eigen::MatrixXd::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff(), 1e-10);
  for (Eigen::Index i = 1; i < axes.singular_values.size(); ++i)
    EXPECT_GE(axes.singular_values[i - 1], axes.singular_values[i]);
}

TEST(BuildAxes, RandomizedPathAgreesWithDense) {
  // Zipf-distributed tokens give the decaying spectrum of real text.
  std::mt19937 gen(5);
  std::vector<double> w;
  for (int i = 0; i < 400; ++i) w.push_back(1.0 / (i + 1));
  std::discrete_distribution<int> zipf(w.begin(), w.end());
  std::vector<TokenSeq> units;
  for (int u = 0; u < 40; ++u) {
    std::string s;
    for (int i = 0; i < 200; ++i) s += "t" + std::to_string(zipf(gen)) + " ";
    units.push_back(tokenize(s));
  }
  AxesOptions dense, rand;
  rand.dense_svd_limit = 10;
  const auto a = build_axes(units, dense), b = build_axes(units, rand);
  for (Eigen::Index i = 0; i < 4; ++i)
    EXPECT_NEAR(a.singular_values[i], b.singular_values[i], 1e-6 * a.singular_values[0]);
}

TEST(EigAngles, MeanWindowGivesZero) {
  auto axes = hand_axes();
  // The mean of all three rows is mu.
  const auto a = eig_angles(std::vector<std::string>{"x", "y", "z"}, axes, 2);
  EXPECT_EQ(a.source, AngleSource::kEig);
  for (double t : a.theta) EXPECT_NEAR(t, 0.0, 1e-15);
}

TEST(EigAngles, ClipsAtPi) {
  auto axes = hand_axes();
  axes.mu.setZero();
  axes.sigma.setConstant(0.1);
  axes.epsilon = 0.0;
  // Row x is (1, 0): z = (10, 0).
  const auto a = eig_angles(std::vector<std::string>{"x"}, axes, 2);
  EXPECT_DOUBLE_EQ(a.theta[0], kPi);
  EXPECT_DOUBLE_EQ(a.theta[1], 0.0);
}

TEST(EigAngles, MatchesStepByStepOracle) {
  std::mt19937_64 gen(11);
  std::normal_distribution<double> n01;
  SemanticAxes axes;
  for (int i = 0; i < 30; ++i) {
    axes.terms.push_back("v" + std::to_string(i));
    axes.vocab[axes.terms.back()] = static_cast<std::size_t>(i);
  }
  axes.E.resize(30, 8);
  for (Eigen::Index r = 0; r < 30; ++r)
    for (Eigen::Index c = 0; c < 8; ++c) axes.E(r, c) = n01(gen);
  axes.mu = axes.E.colwise().mean().transpose();
  axes.sigma = ((axes.E.rowwise() - axes.mu.transpose()).array().square().colwise().mean()).sqrt().transpose();
  axes.gamma = 0.8;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::string> w;
    for (int k = 0; k < 7; ++k) w.push_back("v" + std::to_string(gen() % 30));
    w.push_back("oov");
    const auto got = eig_angles(w, axes, 6);
    std::vector<double> v(8, 0.0);
    int hits = 0;
    for (const auto& t : w) {
      if (t == "oov") continue;
      ++hits;
      for (int c = 0; c < 8; ++c) v[c] += axes.E(axes.vocab.at(t), c);
    }
    for (int c = 0; c < 6; ++c) {
      const double z = (v[c] / hits - axes.mu[c]) / (axes.sigma[c] + axes.epsilon);
      EXPECT_NEAR(got.theta[c], std::clamp(axes.gamma * z, -kPi, kPi), 1e-12);
    }
  }
}

TEST(EigAngles, PermutationInvariantAndMonotoneInGamma) {
  auto axes = hand_axes();
  std::vector<std::string> w{"x", "y", "y", "z", "x"};
  const auto a = eig_angles(w, axes, 2);
  std::reverse(w.begin(), w.end());
  const auto b = eig_angles(w, axes, 2);
  for (int j = 0; j < 2; ++j) EXPECT_NEAR(a.theta[j], b.theta[j], 1e-15);
  double prev[2] = {0, 0};
  for (double g : {0.1, 0.5, 1.0, 2.0, 8.0, 50.0}) {
    axes.gamma = g;
    const auto t = eig_angles(std::vector<std::string>{"x", "x", "y"}, axes, 2);
    for (int j = 0; j < 2; ++j) {
      EXPECT_GE(std::abs(t.theta[j]) + 1e-15, prev[j]);
      EXPECT_LE(std::abs(t.theta[j]), kPi);
      prev[j] = std::abs(t.theta[j]);
    }
  }
}

TEST(EigAngles, OutOfVocabularyFallsBack) {
  const auto axes = hand_axes();
  const auto a = eig_angles(std::vector<std::string>{"nope", "never"}, axes, 2);
  EXPECT_EQ(a.source, AngleSource::kLexicalFallback);
  const auto lex = lexical_angles(std::vector<std::string>{"nope", "never"}, 2);
  EXPECT_EQ(a.theta, lex.theta);
}

TEST(LexicalAngles, EmptyIsZeroAndBagSemantics) {
  EXPECT_EQ(lexical_angles({}, 4).theta, std::vector<double>(4, 0.0));
  const auto a = lexical_angles(std::vector<std::string>{"a", "b", "a"}, 12);
  const auto b = lexical_angles(std::vector<std::string>{"a", "a", "b"}, 12);
  for (std::size_t j = 0; j < 12; ++j) {
    EXPECT_NEAR(a.theta[j], b.theta[j], 1e-15);
    EXPECT_LE(std::abs(a.theta[j]), kPi);
  }
}

TEST(Axes, SaveLoadRoundTrip) {
  std::vector<TokenSeq> units{tokenize("alpha beta gamma delta alpha beta epsilon zeta eta theta iota kappa lambda mu")};
  AxesOptions opts;
  opts.d_max = 4;
  const auto axes = build_axes(units, opts);
  const auto path = std::filesystem::temp_directory_path() / "qwb_axes_roundtrip.bin";
  save_axes(path, axes);
  const auto back = load_axes(path);
  EXPECT_EQ(back.terms, axes.terms);
  EXPECT_EQ(back.E, axes.E);
  EXPECT_EQ(back.mu, axes.mu);
  EXPECT_EQ(back.sigma, axes.sigma);
  EXPECT_EQ(back.gamma, axes.gamma);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace qwb
