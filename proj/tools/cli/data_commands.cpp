// Copyright 2026 The qwbench Authors
// SPDX-License-Identifier: Apache-2.0

#include <map>
#include <memory>
#include <optional>

#include "commands.hpp"
#include "common.hpp"
#include "qwb/angles.hpp"
#include "qwb/error.hpp"
#include "qwb/evalkit.hpp"
#include "qwb/fixtures.hpp"
#include "qwb/parallel.hpp"
#include "qwb/store.hpp"

namespace qwb::cli {

using nlohmann::json;

namespace {

struct IngestArgs {
  std::string corpus, out, config;
  std::size_t jobs = 1;
  PipelineFlags flags;
};

void run_ingest(const IngestArgs& a, std::ostream& out) {
  const auto dir = prepare_out_dir(a.out);
  const PipelineConfig cfg = effective_pipeline(load_config(a.config), a.flags);
  const auto docs = read_documents(a.corpus);
  if (docs.empty()) throw Error(ErrorCode::kEmptyCorpus, "corpus " + a.corpus + " has no documents");

  SegmentStore store;
  store.seg = cfg.seg;
  store.docs.resize(docs.size());
  parallel_for(docs.size(), a.jobs, [&](std::size_t i) {
    try {
      store.docs[i] = segment(docs[i], cfg.seg);
    } catch (const Error& e) {
      throw Error(e.code(), "doc " + docs[i].doc_id + ": " + e.what());
    }
  });

  std::map<std::string, std::size_t> roles;
  std::size_t tokens = 0, chunks = 0, subs = 0;
  for (const auto& d : store.docs) {
    tokens += d.tokens.size();
    chunks += d.chunks.size();
    subs += d.subchunks.size();
    for (const auto& s : d.subchunks) ++roles[std::string(to_string(s.role))];
  }
  const auto seg_path = dir / "segments.jsonl";
  write_segments(seg_path, store);
  const json summary{{"documents", store.docs.size()},
                     {"tokens", tokens},
                     {"chunks", chunks},
                     {"subchunks", subs},
                     {"subchunks_by_role", roles}};
  write_json(dir / "ingest.json", summary);

  Manifest m("ingest", dir);
  m.set_config({{"segmentation", segmentation_to_json(cfg.seg)}});
  m.add_input(a.corpus);
  m.add_output(seg_path);
  m.add_output(seg_path.string() + ".json");
  m.add_output(dir / "ingest.json");
  m.write();
  out << summary.dump() << '\n';
}

struct AxesArgs {
  std::string segments, out, config;
  PipelineFlags flags;
};

void run_build_axes(const AxesArgs& a, std::ostream& out) {
  const auto dir = prepare_out_dir(a.out);
  const PipelineConfig cfg = effective_pipeline(load_config(a.config), a.flags);
  const auto store = read_segments(a.segments);
  std::vector<TokenSeq> units;
  for (const auto& d : store.docs) units.push_back(d.tokens);
  if (units.empty()) throw Error(ErrorCode::kEmptyCorpus, "no documents in " + a.segments);
  const SemanticAxes axes = build_axes(units, cfg.axes);
  save_axes(dir / "axes.bin", axes);
  export_axes_json(dir / "axes.json", axes);

  const json axes_cfg = cfg.to_json().at("axes");
  Manifest m("build-axes", dir);
  m.set_config({{"axes", axes_cfg}});
  m.add_input(a.segments);
  m.add_output(dir / "axes.bin");
  m.add_output(dir / "axes.json");
  m.write();
  out << json{{"vocab_size", axes.vocab_size()}, {"d_max", axes.d_max()}}.dump() << '\n';
}

struct EmbedArgs {
  std::string segments, axes, queries, pairs, out, config;
  std::size_t jobs = 1;
  PipelineFlags flags;
};

bool segmentation_overridden(const json& config, const PipelineFlags& f) {
  return (config.contains("pipeline") && config["pipeline"].contains("segmentation")) ||
         f.chunk_tokens || f.chunk_overlap || f.sub_tokens || f.sub_stride || f.window_tokens ||
         f.dense_stride || f.two_phase_shift;
}

void check_axes(const SemanticAxes& axes, const AxesOptions& want) {
  if (axes.d_max() != want.d_max || axes.gamma != want.gamma || axes.epsilon != want.epsilon ||
      axes.scaling != want.scaling) {
    throw Error(ErrorCode::kFingerprintMismatch,
                "axes file was built with different axis parameters than the pipeline config");
  }
}

void run_embed(const EmbedArgs& a, std::ostream& out) {
  const auto dir = prepare_out_dir(a.out);
  const json config = load_config(a.config);
  PipelineConfig cfg = effective_pipeline(config, a.flags);
  const auto store = read_segments(a.segments);
  if (store.docs.empty()) throw Error(ErrorCode::kEmptyCorpus, "no documents in " + a.segments);
  if (segmentation_to_json(cfg.seg) != segmentation_to_json(store.seg)) {
    if (segmentation_overridden(config, a.flags)) {
      throw Error(ErrorCode::kFingerprintMismatch,
                  "segmentation settings differ from those used to build " + a.segments);
    }
    cfg.seg = store.seg;
    cfg.validate();
  }

  std::optional<SemanticAxes> axes;
  if (!a.axes.empty()) {
    axes = load_axes(a.axes);
    check_axes(*axes, cfg.axes);
  }
  const SemanticAxes* ax = axes ? &*axes : nullptr;
  const Fingerprint fp = fingerprint(cfg);
  const json meta_base{{"fingerprint", fp.digest}, {"config", cfg.to_json()},
                       {"channel", to_string(cfg.channel)}};

  std::vector<std::vector<Embedding>> per_doc(store.docs.size());
  std::vector<EmbedStats> doc_stats(store.docs.size());
  parallel_for(store.docs.size(), a.jobs, [&](std::size_t i) {
    try {
      per_doc[i] = embed_document(store.docs[i], ax, cfg, &doc_stats[i]);
    } catch (const Error& e) {
      throw Error(e.code(), "doc " + store.docs[i].doc_id + ": " + e.what());
    }
  });
  std::vector<Embedding> subs, docs;
  EmbedStats stats;
  for (std::size_t i = 0; i < per_doc.size(); ++i) {
    stats += doc_stats[i];
    docs.push_back(document_embedding(per_doc[i], store.docs[i].doc_id));
    docs.back().channel = cfg.channel;
    for (auto& e : per_doc[i]) subs.push_back(std::move(e));
  }

  Manifest m("embed", dir);
  m.set_fingerprint(fp.digest);
  m.set_config({{"pipeline", cfg.to_json()}});
  m.add_input(a.segments);
  if (!a.axes.empty()) m.add_input(a.axes);

  auto save = [&](const std::string& name, const std::vector<Embedding>& recs,
                  const std::string& level) {
    json meta = meta_base;
    meta["level"] = level;
    save_embeddings(dir / name, recs, meta);
    m.add_output(dir / name);
    m.add_output(dir / (name + ".json"));
  };
  save("subchunks.bin", subs, "subchunk");
  save("docs.bin", docs, "document");

  json summary{{"subchunks", subs.size()}, {"documents", docs.size()}};
  if (!a.queries.empty()) {
    const auto queries = read_queries(a.queries);
    std::vector<Embedding> q(queries.size());
    std::vector<EmbedStats> qs(queries.size());
    parallel_for(queries.size(), a.jobs, [&](std::size_t i) {
      try {
        q[i] = embed_tokens(tokenize(queries[i].text), queries[i].qid, ax, cfg, &qs[i]);
      } catch (const Error& e) {
        throw Error(e.code(), "query " + queries[i].qid + ": " + e.what());
      }
    });
    for (const auto& s : qs) stats += s;
    m.add_input(a.queries);
    save("queries.bin", q, "query");
    summary["queries"] = q.size();
  }
  if (!a.pairs.empty()) {
    const auto pairs = read_pairs_tsv(a.pairs);
    std::vector<Embedding> p(2 * pairs.size());
    std::vector<EmbedStats> ps(pairs.size());
    parallel_for(pairs.size(), a.jobs, [&](std::size_t i) {
      p[2 * i] = embed_tokens(tokenize(pairs[i].a), pair_sentence_id(i + 1, false), ax, cfg, &ps[i]);
      p[2 * i + 1] = embed_tokens(tokenize(pairs[i].b), pair_sentence_id(i + 1, true), ax, cfg, &ps[i]);
    });
    for (const auto& s : ps) stats += s;
    m.add_input(a.pairs);
    save("pairs.bin", p, "pair_sentence");
    summary["pair_sentences"] = p.size();
  }

  const json stats_json{{"eig_windows", stats.eig_windows},
                        {"lexical_fallback_windows", stats.lexical_windows},
                        {"axes", a.axes.empty() ? json(nullptr) : json(a.axes)},
                        {"fingerprint", fp.digest}};
  write_json(dir / "stats.json", stats_json);
  m.add_output(dir / "stats.json");
  m.write();
  summary["fingerprint"] = fp.digest;
  out << summary.dump() << '\n';
}

struct FixtureArgs {
  std::string out;
  FixtureOptions opts;
};

void run_fixtures(const FixtureArgs& a, std::ostream& out) {
  const auto dir = prepare_out_dir(a.out);
  const Fixture fx = make_fixture(a.opts);
  write_fixture(dir, fx);
  Manifest m("fixtures", dir);
  m.set_config({{"seed", a.opts.seed},
                {"n_docs", a.opts.n_docs},
                {"doc_tokens", a.opts.doc_tokens},
                {"queries_per_doc", a.opts.queries_per_doc},
                {"query_tokens", a.opts.query_tokens},
                {"pairs_per_regime", a.opts.pairs_per_regime},
                {"sentence_tokens", a.opts.sentence_tokens},
                {"teacher_dim", a.opts.teacher_dim}});
  for (const char* f : {"corpus.jsonl", "queries.jsonl", "pairs.tsv", "teacher_pairs.jsonl"}) {
    m.add_output(dir / f);
  }
  m.write();
  out << json{{"documents", fx.docs.size()}, {"queries", fx.queries.size()},
              {"pairs", fx.pairs.size()}}
             .dump()
      << '\n';
}

}  // namespace

void add_data_commands(CLI::App& app, std::ostream& out) {
  {
    auto a = std::make_shared<IngestArgs>();
    auto* sub = app.add_subcommand("ingest", "Tokenize and segment a JSONL corpus");
    sub->add_option("--corpus", a->corpus, "Corpus JSONL {doc_id, text, lang}")->required();
    sub->add_option("--out", a->out, "Output directory")->required();
    sub->add_option("--config", a->config, "JSON config file");
    sub->add_option("--jobs", a->jobs, "Worker threads")->check(CLI::PositiveNumber);
    a->flags.add_to(sub);
    sub->callback([a, &out] { run_ingest(*a, out); });
  }
  {
    auto a = std::make_shared<AxesArgs>();
    auto* sub = app.add_subcommand("build-axes", "Build SVD semantic axes from a segment store");
    sub->add_option("--segments", a->segments, "segments.jsonl from ingest")->required();
    sub->add_option("--out", a->out)->required();
    sub->add_option("--config", a->config);
    a->flags.add_to(sub);
    sub->callback([a, &out] { run_build_axes(*a, out); });
  }
  {
    auto a = std::make_shared<EmbedArgs>();
    auto* sub = app.add_subcommand("embed", "Embed sub-chunks, documents, queries and pairs");
    sub->add_option("--segments", a->segments)->required();
    sub->add_option("--axes", a->axes, "axes.bin; without it every window uses lexical angles");
    sub->add_option("--queries", a->queries, "Also embed a query JSONL file");
    sub->add_option("--pairs", a->pairs, "Also embed both sides of a pairs TSV");
    sub->add_option("--out", a->out)->required();
    sub->add_option("--config", a->config);
    sub->add_option("--jobs", a->jobs)->check(CLI::PositiveNumber);
    a->flags.add_to(sub);
    sub->callback([a, &out] { run_embed(*a, out); });
  }
  {
    auto a = std::make_shared<FixtureArgs>();
    auto* sub = app.add_subcommand("fixtures", "Write the synthetic corpus, queries and pairs");
    sub->add_option("--out", a->out)->required();
    sub->add_option("--seed", a->opts.seed);
    sub->add_option("--docs", a->opts.n_docs);
    sub->add_option("--doc-tokens", a->opts.doc_tokens);
    sub->add_option("--queries-per-doc", a->opts.queries_per_doc);
    sub->add_option("--pairs-per-regime", a->opts.pairs_per_regime);
    sub->callback([a, &out] { run_fixtures(*a, out); });
  }
}

}  // namespace qwb::cli
