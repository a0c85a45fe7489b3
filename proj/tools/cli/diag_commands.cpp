// Copyright 2026 The qwbench Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include "commands.hpp"
#include "common.hpp"
#include "qwb/angles.hpp"
#include "qwb/distill.hpp"
#include "qwb/error.hpp"
#include "qwb/evalkit.hpp"
#include "qwb/fixtures.hpp"
#include "qwb/parallel.hpp"
#include "qwb/qkernel.hpp"
#include "qwb/store.hpp"

namespace qwb::cli {

using nlohmann::json;

namespace {

std::string fmt(const std::optional<double>& v) {
  if (!v) return "undefined";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", *v);
  return buf;
}

struct PairwiseArgs {
  std::string pairs, embeddings, axes, out, config;
  std::size_t jobs = 1;
  PipelineFlags flags;
};

void run_diag_pairwise(const PairwiseArgs& a, std::ostream& out) {
  const auto dir = prepare_out_dir(a.out);
  const auto pairs = read_pairs_tsv(a.pairs);
  Manifest m("diag-pairwise", dir);
  m.add_input(a.pairs);

  std::vector<double> cosines(pairs.size());
  std::string source;
  if (!a.embeddings.empty()) {
    const EmbeddingStore store = load_embeddings(a.embeddings);
    std::map<std::string, const Embedding*> by_id;
    for (const auto& e : store.records) by_id.emplace(e.owner_id, &e);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const auto ia = by_id.find(pair_sentence_id(i + 1, false));
      const auto ib = by_id.find(pair_sentence_id(i + 1, true));
      if (ia == by_id.end() || ib == by_id.end()) {
        throw Error(ErrorCode::kMappingError,
                    "no embedding for pair line " + std::to_string(i + 1) + " in " + a.embeddings);
      }
      cosines[i] = cosine(ia->second->vec, ib->second->vec);
    }
    source = store.records.empty() ? "empty" : std::string(to_string(store.records[0].channel));
    m.add_input(a.embeddings);
    if (!store.fingerprint().empty()) m.set_fingerprint(store.fingerprint());
    m.set_config({{"source", a.embeddings}, {"channel", source}});
  } else {
    const PipelineConfig cfg = effective_pipeline(load_config(a.config), a.flags);
    std::optional<SemanticAxes> axes;
    if (!a.axes.empty()) {
      axes = load_axes(a.axes);
      m.add_input(a.axes);
    }
    const SemanticAxes* ax = axes ? &*axes : nullptr;
    parallel_for(pairs.size(), a.jobs, [&](std::size_t i) {
      const auto ea = embed_tokens(tokenize(pairs[i].a), pair_sentence_id(i + 1, false), ax, cfg);
      const auto eb = embed_tokens(tokenize(pairs[i].b), pair_sentence_id(i + 1, true), ax, cfg);
      cosines[i] = cosine(ea.vec, eb.vec);
    });
    source = std::string(to_string(cfg.channel));
    m.set_fingerprint(fingerprint(cfg).digest);
    m.set_config({{"pipeline", cfg.to_json()}});
  }

  const PairwiseReport report = pairwise_report(cosines, pairs);
  json j = report.to_json();
  j["source"] = source;
  j["mass_above_0.5"] = report.histogram.mass_from(0.5);
  write_json(dir / "pairwise.json", j);
  write_histogram_csv(dir / "histogram.csv", report.histogram);
  {
    std::ofstream f(dir / "pairwise.md");
    f << "| Source | Pearson | Spearman | MAE | Mean sim. |\n|---|---|---|---|---|\n";
    f << "| " << source << " | " << fmt(report.pearson) << " | " << fmt(report.spearman) << " | "
      << fmt(report.mae) << " | " << fmt(report.mean_sim) << " |\n\n";
    f << "| Regime | n | Mean sim. | Mean ref. | MAE |\n|---|---|---|---|---|\n";
    for (const auto& [name, s] : report.regimes) {
      f << "| " << name << " | " << s.n << " | " << fmt(s.mean_sim) << " | " << fmt(s.mean_ref)
        << " | " << fmt(s.mae) << " |\n";
    }
  }
  m.add_output(dir / "pairwise.json");
  m.add_output(dir / "histogram.csv");
  m.add_output(dir / "pairwise.md");
  m.write();
  out << json{{"pearson", j["pearson"]}, {"spearman", j["spearman"]}, {"mae", report.mae},
              {"mean_sim", report.mean_sim}}
             .dump()
      << '\n';
}

struct DistillArgs {
  std::string student, teacher, out, head = "linear";
  double lambda = 1e-3;
  MlpOptions mlp;
  std::size_t n_pairs = 0;
  std::uint64_t seed = 0;
};

void run_distill(const DistillArgs& a, std::ostream& out) {
  const auto dir = prepare_out_dir(a.out);
  const EmbeddingStore student = load_embeddings(a.student);
  const EmbeddingStore teacher = load_embeddings(a.teacher);
  std::map<std::string, const Embedding*> t_by_id;
  for (const auto& t : teacher.records) t_by_id.emplace(t.owner_id, &t);
  std::vector<std::pair<const Embedding*, const Embedding*>> rows;
  for (const auto& s : student.records) {
    auto it = t_by_id.find(s.owner_id);
    if (it != t_by_id.end()) rows.emplace_back(&s, it->second);
  }
  std::sort(rows.begin(), rows.end(),
            [](const auto& x, const auto& y) { return x.first->owner_id < y.first->owner_id; });
  if (rows.size() < 2) {
    throw Error(ErrorCode::kInsufficientOverlap, "student and teacher share fewer than 2 ids");
  }
  const auto m_rows = static_cast<Eigen::Index>(rows.size());
  const auto d_in = static_cast<Eigen::Index>(rows[0].first->vec.size());
  const auto d_out = static_cast<Eigen::Index>(rows[0].second->vec.size());
  Eigen::MatrixXd X(m_rows, d_in), T(m_rows, d_out);
  for (Eigen::Index r = 0; r < m_rows; ++r) {
    const auto& [s, t] = rows[static_cast<std::size_t>(r)];
    X.row(r) = Eigen::Map<const Eigen::RowVectorXd>(s->vec.data(), d_in);
    T.row(r) = Eigen::Map<const Eigen::RowVectorXd>(t->vec.data(), d_out);
  }

  const HeadKind kind = head_kind_from_string(a.head);
  DistillHead head = kind == HeadKind::kLinear ? fit_linear(X, T, a.lambda) : fit_mlp(X, T, a.mlp);

  std::vector<Embedding> distilled;
  distilled.reserve(student.records.size());
  for (const auto& s : student.records) distilled.push_back(apply(head, s));

  const AlignmentReport before = alignment_report(student.records, teacher.records, a.n_pairs, a.seed);
  const AlignmentReport after = alignment_report(distilled, teacher.records, a.n_pairs, a.seed);

  json cfg{{"head", a.head}, {"n_pairs", a.n_pairs}, {"seed", a.seed}};
  if (kind == HeadKind::kLinear) {
    cfg["lambda"] = a.lambda;
  } else {
    cfg["mlp"] = {{"hidden", a.mlp.hidden}, {"epochs", a.mlp.epochs}, {"lr", a.mlp.lr},
                  {"momentum", a.mlp.momentum}, {"batch", a.mlp.batch}, {"seed", a.mlp.seed}};
  }
  save_head(dir / "head.bin", head, {{"student_fingerprint", student.fingerprint()}});
  save_embeddings(dir / "distilled.bin", distilled,
                  {{"fingerprint", student.fingerprint()}, {"head", a.head}, {"channel", "distilled"}});
  const json report{{"head", a.head},
                    {"train_pairs", rows.size()},
                    {"initial_loss", head.meta.initial_loss},
                    {"loss", head.meta.final_loss},
                    {"loss_curve", head.meta.loss_curve},
                    {"alignment_before", before.to_json()},
                    {"alignment_after", after.to_json()}};
  write_json(dir / "distill.json", report);

  Manifest m("distill", dir);
  m.set_config(cfg);
  m.add_input(a.student);
  m.add_input(a.teacher);
  for (const char* f : {"head.bin", "head.bin.json", "distilled.bin", "distilled.bin.json",
                        "distill.json"}) {
    m.add_output(dir / f);
  }
  m.write();
  out << json{{"loss", head.meta.final_loss}, {"r_before", before.r}, {"r_after", after.r}}.dump()
      << '\n';
}

struct KernelArgs {
  std::string embeddings, reference, out, config;
  std::size_t limit = 20;
  std::size_t jobs = 1;
  PipelineFlags flags;
};

void run_kernel(const KernelArgs& a, std::ostream& out) {
  const auto dir = prepare_out_dir(a.out);
  const EmbeddingStore store = load_embeddings(a.embeddings);
  std::vector<const Embedding*> rows;
  for (const auto& e : store.records) {
    if (a.limit && rows.size() >= a.limit) break;
    rows.push_back(&e);
  }
  if (rows.size() < 2) throw Error(ErrorCode::kInsufficientSamples, "kernel needs at least 2 vectors");
  const PipelineConfig pcfg = effective_pipeline(load_config(a.config), a.flags);
  CircuitConfig cc = pcfg.circuit;
  cc.shots = 0;
  cc.n_qubits = a.flags.n_qubits ? *a.flags.n_qubits : std::min(cc.n_qubits, rows.size());
  cc.validate();

  const auto m_rows = static_cast<Eigen::Index>(rows.size());
  const auto dim = static_cast<Eigen::Index>(rows[0]->vec.size());
  Eigen::MatrixXd X(m_rows, dim);
  std::vector<std::string> ids;
  for (Eigen::Index r = 0; r < m_rows; ++r) {
    const Embedding& e = *rows[static_cast<std::size_t>(r)];
    if (static_cast<Eigen::Index>(e.vec.size()) != dim) {
      throw Error(ErrorCode::kDimensionMismatch, "mixed dimensions in " + a.embeddings);
    }
    X.row(r) = Eigen::Map<const Eigen::RowVectorXd>(e.vec.data(), dim);
    ids.push_back(e.owner_id);
  }
  const PcaModel pca = fit_pca(X, cc.n_qubits);
  const KernelMatrix K = encode_and_kernel(X, ids, pca, cc, a.jobs);

  Manifest m("kernel", dir);
  m.add_input(a.embeddings);
  std::optional<Eigen::MatrixXd> ref;
  if (!a.reference.empty()) {
    const EmbeddingStore rstore = load_embeddings(a.reference);
    std::map<std::string, const Embedding*> by_id;
    for (const auto& e : rstore.records) by_id.emplace(e.owner_id, &e);
    ref = Eigen::MatrixXd::Identity(m_rows, m_rows);
    for (Eigen::Index i = 0; i < m_rows; ++i) {
      for (Eigen::Index j = i + 1; j < m_rows; ++j) {
        auto ei = by_id.find(ids[static_cast<std::size_t>(i)]);
        auto ej = by_id.find(ids[static_cast<std::size_t>(j)]);
        if (ei == by_id.end() || ej == by_id.end()) {
          throw Error(ErrorCode::kMappingError, "reference lacks ids of the kernel batch");
        }
        (*ref)(i, j) = (*ref)(j, i) = cosine(ei->second->vec, ej->second->vec);
      }
    }
    m.add_input(a.reference);
  }
  const KernelDiagnostics diag = kernel_diagnostics(K, ref ? &*ref : nullptr);
  write_kernel_csv(dir / "kernel.csv", K);
  json dj = diag.to_json();
  dj["n_qubits"] = cc.n_qubits;
  dj["n_layers"] = cc.n_layers;
  dj["explained_variance"] = std::vector<double>(
      pca.explained_variance.data(), pca.explained_variance.data() + pca.explained_variance.size());
  write_json(dir / "kernel.json", dj);
  write_histogram_csv(dir / "kernel_histogram.csv", diag.histogram);

  m.set_config({{"n_qubits", cc.n_qubits}, {"n_layers", cc.n_layers}, {"limit", a.limit}});
  m.add_output(dir / "kernel.csv");
  m.add_output(dir / "kernel.json");
  m.add_output(dir / "kernel_histogram.csv");
  m.write();
  out << json{{"m", K.ids.size()}, {"mean", diag.mean}, {"min_eigenvalue", diag.min_eigenvalue}}
             .dump()
      << '\n';
}

}  // namespace

void add_diag_commands(CLI::App& app, std::ostream& out) {
  {
    auto a = std::make_shared<PairwiseArgs>();
    auto* sub = app.add_subcommand("diag-pairwise", "Pairwise similarity report for a pairs TSV");
    sub->add_option("--pairs", a->pairs)->required();
    sub->add_option("--embeddings", a->embeddings,
                    "Store with ids p<line>a / p<line>b; without it pairs are embedded here");
    sub->add_option("--axes", a->axes);
    sub->add_option("--out", a->out)->required();
    sub->add_option("--config", a->config);
    sub->add_option("--jobs", a->jobs)->check(CLI::PositiveNumber);
    a->flags.add_to(sub);
    sub->callback([a, &out] { run_diag_pairwise(*a, out); });
  }
  {
    auto a = std::make_shared<DistillArgs>();
    auto* sub = app.add_subcommand("distill", "Fit a projection head from student to teacher");
    sub->add_option("--student", a->student)->required();
    sub->add_option("--teacher", a->teacher)->required();
    sub->add_option("--out", a->out)->required();
    sub->add_option("--head", a->head, "linear | mlp")->check(CLI::IsMember({"linear", "mlp"}));
    sub->add_option("--lambda", a->lambda, "Ridge penalty for the linear head");
    sub->add_option("--hidden", a->mlp.hidden);
    sub->add_option("--epochs", a->mlp.epochs);
    sub->add_option("--lr", a->mlp.lr);
    sub->add_option("--momentum", a->mlp.momentum);
    sub->add_option("--batch", a->mlp.batch);
    sub->add_option("--train-seed", a->mlp.seed);
    sub->add_option("--align-pairs", a->n_pairs, "Pairs sampled for alignment (0 = all)");
    sub->add_option("--seed", a->seed);
    sub->callback([a, &out] { run_distill(*a, out); });
  }
  {
    auto a = std::make_shared<KernelArgs>();
    auto* sub = app.add_subcommand("kernel", "Fidelity kernel of PCA-reduced embeddings");
    sub->add_option("--embeddings", a->embeddings)->required();
    sub->add_option("--reference", a->reference, "Store whose cosines serve as reference");
    sub->add_option("--limit", a->limit, "Use the first N vectors (0 = all)");
    sub->add_option("--out", a->out)->required();
    sub->add_option("--config", a->config);
    sub->add_option("--jobs", a->jobs)->check(CLI::PositiveNumber);
    a->flags.add_to(sub);
    sub->callback([a, &out] { run_kernel(*a, out); });
  }
}

}  // namespace qwb::cli
