// Copyright 2026 The qwbench Authors
// SPDX-License-Identifier: Apache-2.0

#include "qwb/distill.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include "binio.hpp"
#include "qwb/error.hpp"
#include "qwb/evalkit.hpp"
#include "qwb/hashing.hpp"

namespace qwb {

std::string_view to_string(HeadKind kind) { return kind == HeadKind::kLinear ? "linear" : "mlp"; }

HeadKind head_kind_from_string(std::string_view name) {
  if (name == "linear") return HeadKind::kLinear;
  if (name == "mlp") return HeadKind::kMlp;
  throw Error(ErrorCode::kInvalidConfig, "unknown head kind: " + std::string(name));
}

std::size_t DistillHead::input_dim() const {
  return static_cast<std::size_t>(kind == HeadKind::kLinear ? W.cols() : W1.cols());
}

std::size_t DistillHead::output_dim() const {
  return static_cast<std::size_t>(kind == HeadKind::kLinear ? W.rows() : W2.rows());
}

Eigen::MatrixXd DistillHead::forward(const Eigen::MatrixXd& X) const {
  if (static_cast<std::size_t>(X.cols()) != input_dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "head input dimension mismatch");
  }
  if (kind == HeadKind::kLinear) {
    return (X * W.transpose()).rowwise() + b.transpose();
  }
  const Eigen::MatrixXd H = ((X * W1.transpose()).rowwise() + b1.transpose()).array().tanh();
  return (H * W2.transpose()).rowwise() + b2.transpose();
}

DistillHead identity_head(std::size_t dim) {
  DistillHead head;
  head.kind = HeadKind::kLinear;
  const auto d = static_cast<Eigen::Index>(dim);
  head.W = Eigen::MatrixXd::Identity(d, d);
  head.b = Eigen::VectorXd::Zero(d);
  return head;
}

namespace {

void check_pairs(const Eigen::MatrixXd& X, const Eigen::MatrixXd& T) {
  if (X.rows() != T.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "inputs and targets have different pair counts");
  }
  if (X.rows() < 2) throw Error(ErrorCode::kInsufficientSamples, "need at least 2 pairs");
}

}  // namespace

double head_loss(const DistillHead& head, const Eigen::MatrixXd& X, const Eigen::MatrixXd& T) {
  return (head.forward(X) - T).rowwise().squaredNorm().mean();
}

DistillHead fit_linear(const Eigen::MatrixXd& X, const Eigen::MatrixXd& T, double lambda) {
  check_pairs(X, T);
  if (lambda < 0) throw Error(ErrorCode::kInvalidConfig, "ridge lambda must be >= 0");
  const Eigen::Index m = X.rows(), d = X.cols();
  Eigen::MatrixXd Xa(m, d + 1);
  Xa.leftCols(d) = X;
  Xa.col(d).setOnes();
  Eigen::MatrixXd A = Xa.transpose() * Xa;
  A.diagonal().head(d).array() += lambda;
  const Eigen::MatrixXd B = Xa.transpose() * T;

  Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      ldlt.rcond() < 1e-13) {
    throw Error(ErrorCode::kSingularSystem,
                "normal equations are singular; use lambda > 0 or more pairs");
  }
  const Eigen::MatrixXd theta = ldlt.solve(B);  // (d+1) x out
  DistillHead head;
  head.kind = HeadKind::kLinear;
  head.W = theta.topRows(d).transpose();
  head.b = theta.row(d).transpose();
  head.meta.lambda = lambda;
  head.meta.final_loss = head_loss(head, X, T);
  head.meta.initial_loss = head.meta.final_loss;
  return head;
}

DistillHead init_mlp(std::size_t in, std::size_t hidden, std::size_t out, std::uint64_t seed) {
  Rng rng(mix64(seed ^ 0x11a7ULL));
  auto xavier = [&](std::size_t rows, std::size_t cols) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Eigen::MatrixXd M(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index c = 0; c < M.cols(); ++c)
      for (Eigen::Index r = 0; r < M.rows(); ++r) M(r, c) = rng.uniform(-limit, limit);
    return M;
  };
  DistillHead head;
  head.kind = HeadKind::kMlp;
  head.W1 = xavier(hidden, in);
  head.b1 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(hidden));
  head.W2 = xavier(out, hidden);
  head.b2 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(out));
  return head;
}

MlpGradients mlp_gradients(const DistillHead& head, const Eigen::MatrixXd& X,
                           const Eigen::MatrixXd& T) {
  if (head.kind != HeadKind::kMlp) {
    throw Error(ErrorCode::kInvalidConfig, "gradients are defined for MLP heads only");
  }
  const double n = static_cast<double>(X.rows());
  const Eigen::MatrixXd H = ((X * head.W1.transpose()).rowwise() + head.b1.transpose()).array().tanh();
  const Eigen::MatrixXd Z = (H * head.W2.transpose()).rowwise() + head.b2.transpose();
  const Eigen::MatrixXd dZ = 2.0 * (Z - T) / n;  // rows: samples
  MlpGradients g;
  g.W2 = dZ.transpose() * H;
  g.b2 = dZ.colwise().sum().transpose();
  const Eigen::MatrixXd dA = ((dZ * head.W2).array() * (1.0 - H.array().square())).matrix();
  g.W1 = dA.transpose() * X;
  g.b1 = dA.colwise().sum().transpose();
  return g;
}

DistillHead fit_mlp(const Eigen::MatrixXd& X, const Eigen::MatrixXd& T, const MlpOptions& opts) {
  check_pairs(X, T);
  if (opts.epochs < 1) throw Error(ErrorCode::kInvalidConfig, "epochs must be >= 1");
  if (!(opts.lr > 0)) throw Error(ErrorCode::kInvalidConfig, "lr must be > 0");
  if (opts.batch < 1 || opts.hidden < 1) {
    throw Error(ErrorCode::kInvalidConfig, "batch and hidden must be >= 1");
  }
  DistillHead head = init_mlp(static_cast<std::size_t>(X.cols()), opts.hidden,
                              static_cast<std::size_t>(T.cols()), opts.seed);
  head.meta.epochs = opts.epochs;
  head.meta.lr = opts.lr;
  head.meta.momentum = opts.momentum;
  head.meta.batch = opts.batch;
  head.meta.seed = opts.seed;
  head.meta.initial_loss = head_loss(head, X, T);

  MlpGradients velocity{Eigen::MatrixXd::Zero(head.W1.rows(), head.W1.cols()),
                        Eigen::VectorXd::Zero(head.b1.size()),
                        Eigen::MatrixXd::Zero(head.W2.rows(), head.W2.cols()),
                        Eigen::VectorXd::Zero(head.b2.size())};
  std::vector<Eigen::Index> order(static_cast<std::size_t>(X.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Rng rng(mix64(opts.seed ^ 0x5b0ffULL));

  for (std::size_t epoch = 0; epoch < opts.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng.below(i)]);
    }
    for (std::size_t start = 0; start < order.size(); start += opts.batch) {
      const std::size_t stop = std::min(order.size(), start + opts.batch);
      const std::vector<Eigen::Index> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                          order.begin() + static_cast<std::ptrdiff_t>(stop));
      const Eigen::MatrixXd Xb = X(idx, Eigen::all);
      const Eigen::MatrixXd Tb = T(idx, Eigen::all);
      const MlpGradients g = mlp_gradients(head, Xb, Tb);
      velocity.W1 = opts.momentum * velocity.W1 - opts.lr * g.W1;
      velocity.b1 = opts.momentum * velocity.b1 - opts.lr * g.b1;
      velocity.W2 = opts.momentum * velocity.W2 - opts.lr * g.W2;
      velocity.b2 = opts.momentum * velocity.b2 - opts.lr * g.b2;
      head.W1 += velocity.W1;
      head.b1 += velocity.b1;
      head.W2 += velocity.W2;
      head.b2 += velocity.b2;
    }
    const double loss = head_loss(head, X, T);
    head.meta.loss_curve.push_back(loss);
    if (!std::isfinite(loss) || loss > 10.0 * head.meta.initial_loss) {
      throw Error(ErrorCode::kTrainingDiverged,
                  "training diverged at epoch " + std::to_string(epoch + 1) +
                      " (loss " + std::to_string(loss) + ")");
    }
  }
  head.meta.final_loss = head.meta.loss_curve.back();
  return head;
}

Embedding apply(const DistillHead& head, const Embedding& e) {
  const Eigen::Map<const Eigen::RowVectorXd> row(e.vec.data(),
                                                 static_cast<Eigen::Index>(e.vec.size()));
  const Eigen::MatrixXd z = head.forward(row);
  std::vector<double> out(z.data(), z.data() + z.size());
  double norm2 = 0.0;
  for (double x : out) norm2 += x * x;
  if (!(norm2 > 0.0)) throw Error(ErrorCode::kZeroVector, "head mapped input to zero");
  const double inv = 1.0 / std::sqrt(norm2);
  for (double& x : out) x *= inv;
  return {std::move(out), e.owner_id, Channel::kDistilled};
}

nlohmann::json AlignmentReport::to_json() const {
  nlohmann::json j{{"r", r}, {"mae", mae}, {"n_pairs", n_pairs}, {"shared_ids", shared_ids},
                   {"space", "pairwise cosine"}};
  j["coordinate_r"] = coordinate_r ? nlohmann::json(*coordinate_r) : nlohmann::json(nullptr);
  return j;
}

AlignmentReport alignment_report(std::span<const Embedding> student,
                                 std::span<const Embedding> teacher, std::size_t n_pairs,
                                 std::uint64_t seed) {
  std::map<std::string, const Embedding*> t_by_id;
  for (const auto& t : teacher) t_by_id.emplace(t.owner_id, &t);
  std::map<std::string, std::pair<const Embedding*, const Embedding*>> shared;
  for (const auto& s : student) {
    auto it = t_by_id.find(s.owner_id);
    if (it != t_by_id.end()) shared.emplace(s.owner_id, std::make_pair(&s, it->second));
  }
  if (shared.size() < 2) {
    throw Error(ErrorCode::kInsufficientOverlap,
                "student and teacher share " + std::to_string(shared.size()) + " ids, need 2");
  }
  std::vector<std::pair<const Embedding*, const Embedding*>> rows;
  for (const auto& kv : shared) rows.push_back(kv.second);

  const std::size_t s = rows.size();
  const std::size_t total = s * (s - 1) / 2;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (n_pairs == 0 || n_pairs >= total) {
    for (std::size_t i = 0; i < s; ++i)
      for (std::size_t j = i + 1; j < s; ++j) pairs.emplace_back(i, j);
  } else {
    Rng rng(seed);
    while (pairs.size() < n_pairs) {
      const std::size_t i = rng.below(s);
      const std::size_t j = rng.below(s);
      if (i != j) pairs.emplace_back(std::min(i, j), std::max(i, j));
    }
  }
  std::vector<double> cs, ct;
  cs.reserve(pairs.size());
  ct.reserve(pairs.size());
  for (const auto& [i, j] : pairs) {
    cs.push_back(cosine(rows[i].first->vec, rows[j].first->vec));
    ct.push_back(cosine(rows[i].second->vec, rows[j].second->vec));
  }
  AlignmentReport report;
  report.n_pairs = pairs.size();
  report.shared_ids = s;
  report.r = pearson(cs, ct);
  double abs_sum = 0.0;
  for (std::size_t k = 0; k < cs.size(); ++k) abs_sum += std::abs(cs[k] - ct[k]);
  report.mae = abs_sum / static_cast<double>(cs.size());

  if (rows.front().first->vec.size() == rows.front().second->vec.size()) {
    std::vector<double> xs, xt;
    for (const auto& [a, b] : rows) {
      xs.insert(xs.end(), a->vec.begin(), a->vec.end());
      xt.insert(xt.end(), b->vec.begin(), b->vec.end());
    }
    try {
      report.coordinate_r = pearson(xs, xt);
    } catch (const Error&) {
      report.coordinate_r.reset();
    }
  }
  return report;
}

namespace {
constexpr char kHeadMagic[9] = "QWBHEAD1";

void put_matrix(std::ostream& out, const Eigen::MatrixXd& M) {
  binio::put<std::uint64_t>(out, static_cast<std::uint64_t>(M.rows()));
  binio::put<std::uint64_t>(out, static_cast<std::uint64_t>(M.cols()));
  binio::put_array(out, M.data(), static_cast<std::size_t>(M.size()));  // column-major
}

Eigen::MatrixXd get_matrix(std::istream& in) {
  const auto rows = static_cast<Eigen::Index>(binio::get<std::uint64_t>(in));
  const auto cols = static_cast<Eigen::Index>(binio::get<std::uint64_t>(in));
  Eigen::MatrixXd M(rows, cols);
  binio::get_array(in, M.data(), static_cast<std::size_t>(M.size()));
  return M;
}
}  // namespace

void save_head(const std::filesystem::path& path, const DistillHead& head,
               const nlohmann::json& extra_meta) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  binio::put_magic(out, kHeadMagic);
  binio::put<std::uint32_t>(out, static_cast<std::uint32_t>(head.kind));
  if (head.kind == HeadKind::kLinear) {
    put_matrix(out, head.W);
    put_matrix(out, head.b);
  } else {
    put_matrix(out, head.W1);
    put_matrix(out, head.b1);
    put_matrix(out, head.W2);
    put_matrix(out, head.b2);
  }
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());

  nlohmann::json meta = extra_meta;
  meta["kind"] = to_string(head.kind);
  meta["input_dim"] = head.input_dim();
  meta["output_dim"] = head.output_dim();
  if (head.kind == HeadKind::kMlp) meta["hidden"] = head.W1.rows();
  meta["seed"] = head.meta.seed;
  meta["epochs"] = head.meta.epochs;
  meta["lr"] = head.meta.lr;
  meta["momentum"] = head.meta.momentum;
  meta["batch"] = head.meta.batch;
  meta["lambda"] = head.meta.lambda;
  meta["initial_loss"] = head.meta.initial_loss;
  meta["final_loss"] = head.meta.final_loss;
  meta["loss_curve"] = head.meta.loss_curve;
  std::ofstream mout(path.string() + ".json");
  if (!mout) throw Error(ErrorCode::kIo, "cannot write head metadata");
  mout << meta.dump(2) << '\n';
}

DistillHead load_head(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  binio::expect_magic(in, kHeadMagic);
  DistillHead head;
  head.kind = static_cast<HeadKind>(binio::get<std::uint32_t>(in));
  if (head.kind == HeadKind::kLinear) {
    head.W = get_matrix(in);
    head.b = get_matrix(in);
  } else {
    head.W1 = get_matrix(in);
    head.b1 = get_matrix(in);
    head.W2 = get_matrix(in);
    head.b2 = get_matrix(in);
  }
  std::ifstream min(path.string() + ".json");
  if (min) {
    const auto meta = nlohmann::json::parse(min, nullptr, false);
    if (!meta.is_discarded()) {
      head.meta.seed = meta.value("seed", std::uint64_t{0});
      head.meta.final_loss = meta.value("final_loss", 0.0);
      head.meta.loss_curve = meta.value("loss_curve", std::vector<double>{});
    }
  }
  return head;
}

}  // namespace qwb
