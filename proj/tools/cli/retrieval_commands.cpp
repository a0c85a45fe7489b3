// Copyright 2026 The qwbench Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <optional>

#include "commands.hpp"
#include "common.hpp"
#include "qwb/error.hpp"
#include "qwb/evalkit.hpp"
#include "qwb/fusion.hpp"
#include "qwb/lexindex.hpp"
#include "qwb/parallel.hpp"
#include "qwb/store.hpp"
#include "qwb/vecindex.hpp"

namespace qwb::cli {

using nlohmann::json;

namespace {

struct Bm25Args {
  std::string segments, out, config, level = "doc";
  std::optional<double> k1, b;
};

void run_index_bm25(const Bm25Args& a, std::ostream& out) {
  const auto dir = prepare_out_dir(a.out);
  const json config = load_config(a.config);
  Bm25Params params;
  if (config.contains("bm25")) {
    params.k1 = config["bm25"].value("k1", params.k1);
    params.b = config["bm25"].value("b", params.b);
  }
  if (a.k1) params.k1 = *a.k1;
  if (a.b) params.b = *a.b;
  const auto store = read_segments(a.segments);
  std::vector<IndexUnit> units;
  for (const auto& d : store.docs) {
    if (a.level == "doc") {
      units.push_back({d.doc_id, d.tokens.tokens});
    } else {
      for (const auto& s : d.subchunks)
        if (s.role == SubChunkRole::kBase) units.push_back({s.sub_id, s.tokens.tokens});
    }
  }
  const auto index = Bm25Index::build(std::move(units), params);
  index.save(dir / "bm25.idx");
  Manifest m("index-bm25", dir);
  m.set_config({{"bm25", {{"k1", params.k1}, {"b", params.b}}}, {"level", a.level}});
  m.add_input(a.segments);
  m.add_output(dir / "bm25.idx");
  m.write();
  out << json{{"units", index.size()}, {"terms", index.postings().size()},
              {"avg_length", index.avg_length()}}
             .dump()
      << '\n';
}

struct VecArgs {
  std::string embeddings, out;
};

void run_index_vec(const VecArgs& a, std::ostream& out) {
  const auto dir = prepare_out_dir(a.out);
  const EmbeddingStore store = load_embeddings(a.embeddings);
  const auto index = VecIndex::build(store.records, store.fingerprint());
  json meta = store.meta;
  meta["channel"] = to_string(index.channel());
  save_embeddings(dir / "vectors.bin", store.records, meta);
  Manifest m("index-vec", dir);
  if (!store.fingerprint().empty()) m.set_fingerprint(store.fingerprint());
  m.set_config({{"source", a.embeddings}, {"channel", to_string(index.channel())}});
  m.add_input(a.embeddings);
  m.add_output(dir / "vectors.bin");
  m.add_output(dir / "vectors.bin.json");
  m.write();
  out << json{{"vectors", index.size()}, {"dim", index.dim()},
              {"channel", to_string(index.channel())}}
             .dump()
      << '\n';
}

struct SearchArgs {
  std::string queries, bm25, vectors, query_vectors, segments, out, config, ce;
  std::string amp_vectors, amp_query_vectors;
  std::string mode = "hybrid", agg = "max", name;
  std::optional<double> alpha;
  std::optional<std::string> dual;
  std::optional<std::size_t> top_k, rrf_k;
  std::optional<double> ce_std_floor;
  std::size_t candidates = 20;
  bool dynamic = false, sweep = false;
  std::size_t jobs = 1;
};

FusionConfig fusion_config(const json& config, const SearchArgs& a) {
  FusionConfig f;
  if (config.contains("fusion")) {
    const auto& j = config["fusion"];
    f.alpha = j.value("alpha", f.alpha);
    f.dynamic = j.value("dynamic", f.dynamic);
    f.alpha_grid = j.value("alpha_grid", f.alpha_grid);
    f.rrf_k = j.value("rrf_k", f.rrf_k);
    f.top_k = j.value("top_k", f.top_k);
    f.ce_std_floor = j.value("ce_std_floor", f.ce_std_floor);
    if (j.contains("dual")) f.dual = dual_mode_from_string(j["dual"].get<std::string>());
  }
  if (a.alpha) f.alpha = *a.alpha;
  if (a.dynamic) f.dynamic = true;
  if (a.top_k) f.top_k = *a.top_k;
  if (a.rrf_k) f.rrf_k = *a.rrf_k;
  if (a.ce_std_floor) f.ce_std_floor = *a.ce_std_floor;
  if (a.dual) f.dual = dual_mode_from_string(*a.dual);
  f.validate();
  return f;
}

// Dense arm over either document vectors or sub-chunk vectors aggregated to
// their documents.
struct DenseArm {
  VecIndex index;
  std::map<std::string, Embedding> queries;
  const std::map<std::string, std::string>* doc_of = nullptr;
  DocAggregation agg = DocAggregation::kMax;

  Ranking search(const std::string& qid, std::size_t k) const {
    auto it = queries.find(qid);
    if (it == queries.end()) {
      throw Error(ErrorCode::kMappingError, "no query vector for " + qid);
    }
    if (doc_of) return doc_score_from_subchunks(index, it->second, *doc_of, agg, k);
    return index.search(it->second, k);
  }
};

DenseArm load_dense(const std::string& vectors, const std::string& query_vectors) {
  DenseArm arm;
  const auto store = load_embeddings(vectors);
  const auto qstore = load_embeddings(query_vectors);
  if (!store.fingerprint().empty() && !qstore.fingerprint().empty() &&
      store.fingerprint() != qstore.fingerprint()) {
    throw Error(ErrorCode::kFingerprintMismatch,
                "query vectors and index were produced by different pipeline configs");
  }
  arm.index = VecIndex::build(store.records, store.fingerprint());
  for (const auto& q : qstore.records) arm.queries.emplace(q.owner_id, q);
  return arm;
}

json candidates_json(const CandidateSet& set, const Ranking& fused) {
  std::map<std::string, double> fused_score;
  for (const auto& s : fused) fused_score[s.id] = s.score;
  json arr = json::array();
  for (const auto& c : set.entries) {
    json sources = json::array();
    if (c.from_bm25) sources.push_back("bm25");
    if (c.from_embed) sources.push_back("embed");
    arr.push_back({{"id", c.id},
                   {"bm25_raw", c.bm25_raw},
                   {"embed_raw", c.embed_raw},
                   {"bm25_norm", c.bm25_norm},
                   {"embed_norm", c.embed_norm},
                   {"fused", fused_score.count(c.id) ? json(fused_score[c.id]) : json(nullptr)},
                   {"sources", sources}});
  }
  return arr;
}

std::string alpha_tag(double alpha) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", alpha);
  return buf;
}

void run_search(const SearchArgs& a, std::ostream& out) {
  const auto dir = prepare_out_dir(a.out);
  const json config = load_config(a.config);
  const FusionConfig fcfg = fusion_config(config, a);
  if (a.mode != "hybrid" && a.mode != "bm25" && a.mode != "embed" && a.mode != "rrf") {
    throw Error(ErrorCode::kInvalidConfig, "unknown mode: " + a.mode);
  }
  const auto queries = read_queries(a.queries);
  const auto bm25 = Bm25Index::load(a.bm25);

  std::map<std::string, std::string> doc_of;
  if (!a.segments.empty()) {
    for (const auto& d : read_segments(a.segments).docs)
      for (const auto& s : d.subchunks) doc_of[s.sub_id] = d.doc_id;
  }
  const DocAggregation agg = doc_aggregation_from_string(a.agg);
  DenseArm dense = load_dense(a.vectors, a.query_vectors);
  dense.agg = agg;
  if (!doc_of.empty()) dense.doc_of = &doc_of;
  std::optional<DenseArm> amp;
  if (fcfg.dual != DualMode::kOff) {
    if (a.amp_vectors.empty() || a.amp_query_vectors.empty()) {
      throw Error(ErrorCode::kInvalidConfig, "--dual needs --amp-vectors and --amp-query-vectors");
    }
    amp = load_dense(a.amp_vectors, a.amp_query_vectors);
    amp->agg = agg;
    if (!doc_of.empty()) amp->doc_of = &doc_of;
  }
  std::optional<CeScores> ce;
  if (!a.ce.empty()) ce = CeScores::read_tsv(a.ce);

  std::string method = a.name;
  if (method.empty()) {
    method = a.mode;
    if (a.mode == "hybrid") method += fcfg.dynamic ? "_dyn" + alpha_tag(fcfg.alpha) : "_a" + alpha_tag(fcfg.alpha);
    if (ce) method += "_ce";
  }

  std::vector<CandidateSet> sets(queries.size());
  std::vector<json> lines(queries.size());
  parallel_for(queries.size(), a.jobs, [&](std::size_t i) {
    const Query& q = queries[i];
    try {
      const TokenSeq toks = tokenize(q.text);
      const Ranking lex = bm25.score(toks.tokens, a.candidates);
      Ranking emb = dense.search(q.qid, a.candidates);
      if (amp) {
        emb = dual_channel(emb, amp->search(q.qid, a.candidates), fcfg.dual, fcfg.rrf_k);
        truncate_ranking(emb, a.candidates);
      }
      sets[i] = candidate_union(q.qid, lex, emb);

      json line{{"qid", q.qid}, {"method", method}, {"mode", a.mode}};
      Ranking ranked;
      if (a.mode == "bm25") {
        ranked = lex;
      } else if (a.mode == "embed") {
        ranked = emb;
      } else if (a.mode == "rrf") {
        const Ranking lists[] = {lex, emb};
        ranked = rrf(lists, fcfg.rrf_k);
      } else if (fcfg.dynamic) {
        auto d = dynamic_alpha(sets[i], fcfg.alpha);
        line["alpha"] = fcfg.alpha;
        line["alpha_used"] = d.alpha_used;
        line["margin"] = d.margin;
        ranked = std::move(d.ranking);
      } else {
        line["alpha"] = fcfg.alpha;
        line["alpha_used"] = fcfg.alpha;
        ranked = interpolate(sets[i], fcfg.alpha);
      }
      line["candidates"] = candidates_json(sets[i], a.mode == "hybrid" ? ranked : Ranking{});
      if (ce) {
        const CeOutcome o = ce_rerank(ranked, q.qid, *ce, fcfg.top_k, fcfg.ce_std_floor);
        line["ce"] = {{"applied", o.applied},
                      {"reason", o.reason},
                      {"coverage", o.coverage},
                      {"spearman", o.spearman ? json(*o.spearman) : json(nullptr)}};
        ranked = o.ranking;
      }
      if (ranked.size() > fcfg.top_k) ranked.resize(fcfg.top_k);
      line["ranking"] = ids_of(ranked);
      json scores = json::array();
      for (const auto& s : ranked) scores.push_back(s.score);
      line["scores"] = scores;
      lines[i] = std::move(line);
    } catch (const Error& e) {
      throw Error(e.code(), "query " + q.qid + ": " + e.what());
    }
  });

  Manifest m("search", dir);
  m.set_config({{"fusion", fcfg.to_json()},
                {"mode", a.mode},
                {"candidates", a.candidates},
                {"aggregation", to_string(agg)},
                {"method", method}});
  for (const auto* p : {&a.queries, &a.bm25, &a.vectors, &a.query_vectors}) m.add_input(*p);
  if (!a.segments.empty()) m.add_input(a.segments);
  if (!a.ce.empty()) m.add_input(a.ce);
  if (amp) {
    m.add_input(a.amp_vectors);
    m.add_input(a.amp_query_vectors);
  }

  const auto run_path = dir / "run.jsonl";
  {
    std::ofstream f(run_path);
    if (!f) throw Error(ErrorCode::kIo, "cannot write " + run_path.string());
    for (const auto& l : lines) f << l.dump() << '\n';
  }
  m.add_output(run_path);

  json summary{{"queries", queries.size()}, {"method", method}};
  if (ce) {
    std::size_t applied = 0;
    for (const auto& l : lines) applied += l["ce"]["applied"].get<bool>() ? 1 : 0;
    summary["ce_applied"] = applied;
  }
  if (a.sweep) {
    std::map<std::string, std::string> relevant;
    for (const auto& q : queries) relevant[q.qid] = q.relevant_doc;
    for (double alpha : fcfg.alpha_grid) {
      const auto path = dir / ("sweep_a" + alpha_tag(alpha) + ".jsonl");
      std::ofstream f(path);
      if (!f) throw Error(ErrorCode::kIo, "cannot write " + path.string());
      for (const auto& set : sets) {
        Ranking r = interpolate(set, alpha);
        if (r.size() > fcfg.top_k) r.resize(fcfg.top_k);
        f << json{{"qid", set.qid}, {"method", "hybrid_a" + alpha_tag(alpha)}, {"alpha", alpha},
                  {"ranking", ids_of(r)}}
                 .dump()
          << '\n';
      }
      m.add_output(path);
    }
    const OracleResult oracle = alpha_oracle(sets, fcfg.alpha_grid, relevant);
    write_json(dir / "alpha_oracle.json", oracle.to_json());
    m.add_output(dir / "alpha_oracle.json");
    summary["alpha_oracle"] = oracle.aggregate;
  }
  m.write();
  out << summary.dump() << '\n';
}

struct EvalArgs {
  std::vector<std::string> runs;
  std::string queries, out;
};

void run_eval(const EvalArgs& a, std::ostream& out) {
  const auto dir = prepare_out_dir(a.out);
  std::vector<QueryJudgment> judgments;
  for (const auto& q : read_queries(a.queries)) judgments.push_back({q.qid, q.relevant_doc});
  std::vector<MetricsReport> reports;
  Manifest m("eval", dir);
  m.add_input(a.queries);
  for (const auto& run : a.runs) {
    std::ifstream in(run);
    if (!in) throw Error(ErrorCode::kIo, "cannot open " + run);
    std::map<std::string, std::vector<std::string>> rankings;
    std::string method, line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        const auto j = json::parse(line);
        rankings[j.at("qid").get<std::string>()] = j.at("ranking").get<std::vector<std::string>>();
        if (method.empty()) method = j.value("method", std::string{});
      } catch (const json::exception& e) {
        throw Error(ErrorCode::kParse, run + ":" + std::to_string(line_no) + ": " + e.what());
      }
    }
    if (method.empty()) method = fs::path(run).stem().string();
    reports.push_back(retrieval_metrics(rankings, judgments, method));
    m.add_input(run);
  }
  json arr = json::array();
  for (const auto& r : reports) arr.push_back(r.to_json());
  write_json(dir / "metrics.json", arr);
  {
    std::ofstream f(dir / "metrics.md");
    if (!f) throw Error(ErrorCode::kIo, "cannot write metrics.md");
    f << markdown_table(reports);
  }
  m.set_config({{"k_list", {1, 3, 5, 10}}, {"cutoff", kMetricCutoff}});
  m.add_output(dir / "metrics.json");
  m.add_output(dir / "metrics.md");
  m.write();
  out << markdown_table(reports);
}

}  // namespace

void add_retrieval_commands(CLI::App& app, std::ostream& out) {
  {
    auto a = std::make_shared<Bm25Args>();
    auto* sub = app.add_subcommand("index-bm25", "Build a BM25 index over documents or sub-chunks");
    sub->add_option("--segments", a->segments)->required();
    sub->add_option("--out", a->out)->required();
    sub->add_option("--config", a->config);
    sub->add_option("--level", a->level, "doc | sub")->check(CLI::IsMember({"doc", "sub"}));
    sub->add_option("--k1", a->k1);
    sub->add_option("--b", a->b);
    sub->callback([a, &out] { run_index_bm25(*a, out); });
  }
  {
    auto a = std::make_shared<VecArgs>();
    auto* sub = app.add_subcommand("index-vec", "Validate and store an exact vector index");
    sub->add_option("--embeddings", a->embeddings, "Embedding store (.bin or .jsonl)")->required();
    sub->add_option("--out", a->out)->required();
    sub->callback([a, &out] { run_index_vec(*a, out); });
  }
  {
    auto a = std::make_shared<SearchArgs>();
    auto* sub = app.add_subcommand("search", "Run hybrid retrieval for a query file");
    sub->add_option("--queries", a->queries)->required();
    sub->add_option("--bm25", a->bm25, "bm25.idx")->required();
    sub->add_option("--vectors", a->vectors, "Vector index store")->required();
    sub->add_option("--query-vectors", a->query_vectors, "Query embedding store")->required();
    sub->add_option("--segments", a->segments, "Map sub-chunk vectors to documents");
    sub->add_option("--agg", a->agg, "max | mean")->check(CLI::IsMember({"max", "mean"}));
    sub->add_option("--mode", a->mode, "hybrid | bm25 | embed | rrf");
    sub->add_option("--alpha", a->alpha, "Embedding weight in [0, 1]");
    sub->add_flag("--dynamic", a->dynamic, "Gate alpha by BM25 top-2 margin");
    sub->add_flag("--alpha-sweep", a->sweep, "Also rank at every grid alpha and report the oracle");
    sub->add_option("--top-k", a->top_k);
    sub->add_option("--candidates", a->candidates, "Per-arm candidate depth")
        ->check(CLI::PositiveNumber);
    sub->add_option("--rrf-k", a->rrf_k);
    sub->add_option("--ce", a->ce, "Cross-encoder scores TSV (qid, unit_id, score)");
    sub->add_option("--ce-std-floor", a->ce_std_floor);
    sub->add_option("--dual", a->dual, "off | dual_score | rrf");
    sub->add_option("--amp-vectors", a->amp_vectors);
    sub->add_option("--amp-query-vectors", a->amp_query_vectors);
    sub->add_option("--name", a->name, "Method label in the run file");
    sub->add_option("--out", a->out)->required();
    sub->add_option("--config", a->config);
    sub->add_option("--jobs", a->jobs)->check(CLI::PositiveNumber);
    sub->callback([a, &out] { run_search(*a, out); });
  }
  {
    auto a = std::make_shared<EvalArgs>();
    auto* sub = app.add_subcommand("eval", "Score run files against query judgments");
    sub->add_option("--run", a->runs, "Run JSONL (repeatable)")->required();
    sub->add_option("--queries", a->queries, "Query JSONL with relevant_doc")->required();
    sub->add_option("--out", a->out)->required();
    sub->callback([a, &out] { run_eval(*a, out); });
  }
}

}  // namespace qwb::cli
