// Copyright 2026 The qwbench Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "cli/commands.hpp"
#include "json.hpp"
#include "qwb/store.hpp"

namespace qwb {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Result {
  int code;
  std::string out, err;
};

Result qwb_run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<json> read_lines(const fs::path& p) {
  std::vector<json> out;
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(json::parse(line));
  return out;
}

std::vector<std::string> filtered(const std::vector<std::string>& ids,
                                  const std::vector<std::string>& keep) {
  std::vector<std::string> out;
  for (const auto& id : ids)
    if (std::find(keep.begin(), keep.end(), id) != keep.end()) out.push_back(id);
  return out;
}

// One fixture pipeline shared by all tests in the suite.
class Pipeline : public ::testing::Test {
 protected:
  static fs::path root;

  static void must(const std::vector<std::string>& args) {
    const auto r = qwb_run(args);
    ASSERT_EQ(r.code, 0) << args[0] << ": " << r.err;
  }

  static std::string p(const std::string& rel) { return (root / rel).string(); }

  static void SetUpTestSuite() {
    root = fs::temp_directory_path() / ("qwb_cli_pipeline_" + std::to_string(std::random_device{}()));
    fs::remove_all(root);
    must({"fixtures", "--out", p("fx")});
    must({"ingest", "--corpus", p("fx/corpus.jsonl"), "--out", p("ing")});
    must({"build-axes", "--segments", p("ing/segments.jsonl"), "--out", p("ax")});
    must({"embed", "--segments", p("ing/segments.jsonl"), "--axes", p("ax/axes.bin"), "--queries",
          p("fx/queries.jsonl"), "--pairs", p("fx/pairs.tsv"), "--out", p("emb"), "--jobs", "2"});
    must({"index-bm25", "--segments", p("ing/segments.jsonl"), "--out", p("bm")});
    must({"index-vec", "--embeddings", p("emb/docs.bin"), "--out", p("vec")});
  }

  static void TearDownTestSuite() { fs::remove_all(root); }

  static std::vector<std::string> search_args(const std::string& out) {
    return {"search", "--queries", p("fx/queries.jsonl"), "--bm25", p("bm/bm25.idx"), "--vectors",
            p("vec/vectors.bin"), "--query-vectors", p("emb/queries.bin"), "--out", p(out)};
  }
};

fs::path Pipeline::root;

TEST_F(Pipeline, ManifestsAreWritten) {
  for (const char* d : {"fx", "ing", "ax", "emb", "bm", "vec"}) {
    const auto m = json::parse(slurp(root / d / "manifest.json"));
    EXPECT_TRUE(m.contains("command")) << d;
    EXPECT_EQ(m["fingerprint"].get<std::string>().size(), 64u) << d;
    for (const auto& o : m["outputs"]) EXPECT_TRUE(fs::exists(root / d / o.get<std::string>())) << d;
  }
}

TEST_F(Pipeline, RerunsAreByteIdentical) {
  must({"embed", "--segments", p("ing/segments.jsonl"), "--axes", p("ax/axes.bin"), "--out",
        p("emb_again"), "--jobs", "3"});
  EXPECT_EQ(slurp(root / "emb/docs.bin"), slurp(root / "emb_again/docs.bin"));
  EXPECT_EQ(slurp(root / "emb/subchunks.bin"), slurp(root / "emb_again/subchunks.bin"));
  must(search_args("s_a"));
  must(search_args("s_b"));
  EXPECT_EQ(slurp(root / "s_a/run.jsonl"), slurp(root / "s_b/run.jsonl"));
}

TEST_F(Pipeline, AlphaZeroFollowsBm25) {
  auto a0 = search_args("s_a0");
  a0.insert(a0.end(), {"--alpha", "0"});
  must(a0);
  auto bm = search_args("s_bm");
  bm.insert(bm.end(), {"--mode", "bm25"});
  must(bm);
  const auto fused = read_lines(root / "s_a0/run.jsonl");
  const auto lex = read_lines(root / "s_bm/run.jsonl");
  ASSERT_EQ(fused.size(), lex.size());
  for (std::size_t i = 0; i < fused.size(); ++i) {
    const auto f = fused[i]["ranking"].get<std::vector<std::string>>();
    const auto l = lex[i]["ranking"].get<std::vector<std::string>>();
    // Units only the embedding arm found share the minimum lexical score.
    EXPECT_EQ(filtered(f, l), filtered(l, f)) << fused[i]["qid"];
    EXPECT_EQ(f.front(), l.front());
  }
}

TEST_F(Pipeline, ReversedCrossEncoderIsRejected) {
  must(search_args("s_base"));
  const auto base = read_lines(root / "s_base/run.jsonl");
  {
    std::ofstream ce(root / "ce_rev.tsv");
    for (const auto& l : base) {
      const auto ids = l["ranking"].get<std::vector<std::string>>();
      for (std::size_t r = 0; r < ids.size(); ++r)
        ce << l["qid"].get<std::string>() << '\t' << ids[r] << '\t' << static_cast<double>(r) << '\n';
    }
  }
  auto args = search_args("s_ce");
  args.insert(args.end(), {"--ce", p("ce_rev.tsv")});
  must(args);
  const auto got = read_lines(root / "s_ce/run.jsonl");
  ASSERT_EQ(got.size(), base.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    EXPECT_FALSE(got[i]["ce"]["applied"].get<bool>());
    EXPECT_EQ(got[i]["ce"]["reason"], "negative_correlation");
    EXPECT_EQ(got[i]["ranking"], base[i]["ranking"]);
    EXPECT_EQ(got[i]["scores"], base[i]["scores"]);
  }
}

TEST_F(Pipeline, EvalMetricsAreConsistent) {
  must(search_args("s_eval"));
  must({"eval", "--run", p("s_eval/run.jsonl"), "--queries", p("fx/queries.jsonl"), "--out", p("ev")});
  const auto m = json::parse(slurp(root / "ev/metrics.json"));
  ASSERT_EQ(m.size(), 1u);
  EXPECT_DOUBLE_EQ(m[0]["mrr@10"].get<double>(), m[0]["map@10"].get<double>());
  EXPECT_EQ(m[0]["n_queries"], 30);
  EXPECT_NE(slurp(root / "ev/metrics.md").find("| Method |"), std::string::npos);
}

TEST_F(Pipeline, PairwiseHistogramHasTwentyBins) {
  must({"diag-pairwise", "--pairs", p("fx/pairs.tsv"), "--embeddings", p("emb/pairs.bin"), "--out",
        p("pw")});
  std::ifstream in(root / "pw/histogram.csv");
  std::string line;
  std::size_t rows = 0;
  std::getline(in, line);
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  EXPECT_EQ(rows, 20u);
  EXPECT_TRUE(json::parse(slurp(root / "pw/pairwise.json")).is_object());
}

TEST_F(Pipeline, KernelOnFiveVectors) {
  must({"kernel", "--embeddings", p("emb/docs.bin"), "--limit", "5", "--out", p("kern")});
  std::ifstream in(root / "kern/kernel.csv");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(std::count(line.begin(), line.end(), ','), 5);
  std::size_t rows = 0;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  EXPECT_EQ(rows, 5u);
}

TEST(Cli, IdentityDistillationReachesZeroLoss) {
  const auto dir = fs::temp_directory_path() / "qwb_cli_distill";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::mt19937_64 gen(17);
  std::normal_distribution<double> n01;
  std::vector<Embedding> student, teacher;
  for (int i = 0; i < 1100; ++i) {
    std::vector<double> v(1024);
    double s = 0;
    for (auto& x : v) {
      x = n01(gen);
      s += x * x;
    }
    for (auto& x : v) x /= std::sqrt(s);
    const std::string id = "u" + std::to_string(i);
    student.push_back({v, id, Channel::kCurrent});
    teacher.push_back({v, id, Channel::kTeacher});
  }
  save_embeddings(dir / "student.bin", student, json::object());
  write_embeddings_jsonl(dir / "teacher.jsonl", teacher);
  const auto r = qwb_run({"distill", "--student", (dir / "student.bin").string(), "--teacher",
                          (dir / "teacher.jsonl").string(), "--lambda", "0", "--align-pairs", "2000",
                          "--out", (dir / "out").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rep = json::parse(slurp(dir / "out/distill.json"));
  EXPECT_LE(rep["loss"].get<double>(), 1e-6);
  EXPECT_NEAR(rep["alignment_after"]["r"].get<double>(), 1.0, 1e-9);
  fs::remove_all(dir);
}

TEST(Cli, EmptyCorpusIsReported) {
  const auto dir = fs::temp_directory_path() / "qwb_cli_empty";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ofstream(dir / "corpus.jsonl").close();
  const auto r = qwb_run({"ingest", "--corpus", (dir / "corpus.jsonl").string(), "--out",
                          (dir / "out").string()});
  EXPECT_EQ(r.code, 1);
  const auto env = json::parse(r.err);
  EXPECT_EQ(env["error"]["code"], "EmptyCorpus");
  fs::remove_all(dir);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(qwb_run({"search"}).code, 2);
  EXPECT_EQ(qwb_run({"no-such-command"}).code, 2);
  const auto r = qwb_run({"distill", "--student", "a", "--teacher", "b", "--out", "c", "--head", "cnn"});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(json::parse(r.err)["error"]["code"], "UsageError");
}

TEST(Cli, MissingInputIsAnIoError) {
  const auto r = qwb_run({"ingest", "--corpus", "/nonexistent/corpus.jsonl", "--out",
                          (fs::temp_directory_path() / "qwb_cli_missing").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_TRUE(json::parse(r.err).contains("error"));
  fs::remove_all(fs::temp_directory_path() / "qwb_cli_missing");
}

}  // namespace
}  // namespace qwb
