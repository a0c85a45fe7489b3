// Copyright 2026 The qwbench Authors
// SPDX-License-Identifier: Apache-2.0

#include "qwb/fixtures.hpp"

#include <cmath>
#include <cstdio>
#include <set>

#include "qwb/error.hpp"
#include "qwb/hashing.hpp"
#include "qwb/store.hpp"

namespace qwb {

namespace {

constexpr std::size_t kTopicWords = 60;
constexpr std::size_t kCommonWords = 80;
constexpr std::size_t kFunctionWords = 12;
// Share of function-word tokens, roughly that of running English text.
constexpr double kFunctionShare = 0.45;

// Pronounceable pseudo-words, unique across the whole fixture.
class WordMaker {
 public:
  explicit WordMaker(std::uint64_t seed) : rng_(seed) {}

  std::string make() {
    static constexpr const char* kOnset[] = {"b", "d", "f", "g", "k", "l", "m", "n",
                                             "p", "r", "s", "t", "v", "z", "br", "st"};
    static constexpr const char* kVowel[] = {"a", "e", "i", "o", "u", "ai", "ou"};
    for (;;) {
      std::string w;
      const std::size_t syllables = 2 + rng_.below(2);
      for (std::size_t s = 0; s < syllables; ++s) {
        w += kOnset[rng_.below(std::size(kOnset))];
        w += kVowel[rng_.below(std::size(kVowel))];
      }
      if (used_.insert(w).second) return w;
    }
  }

 private:
  Rng rng_;
  std::set<std::string> used_;
};

// Zipf-like pick: index i with weight 1 / (i + 2).
std::size_t zipf_pick(Rng& rng, std::size_t n) {
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += 1.0 / static_cast<double>(i + 2);
  double u = rng.uniform() * total;
  for (std::size_t i = 0; i < n; ++i) {
    u -= 1.0 / static_cast<double>(i + 2);
    if (u < 0) return i;
  }
  return n - 1;
}

struct Vocab {
  std::vector<std::vector<std::string>> topics;
  std::vector<std::string> common;
  std::vector<std::string> function;
};

std::string draw_word(Rng& rng, const Vocab& v, std::size_t topic, double p_topic,
                      double p_neighbor) {
  if (rng.uniform() < kFunctionShare) return v.function[zipf_pick(rng, kFunctionWords)];
  const double u = rng.uniform();
  const std::size_t n_topics = v.topics.size();
  if (u < p_topic) return v.topics[topic][zipf_pick(rng, kTopicWords)];
  if (u < p_topic + p_neighbor) {
    return v.topics[(topic + 1) % n_topics][zipf_pick(rng, kTopicWords)];
  }
  return v.common[zipf_pick(rng, kCommonWords)];
}

std::string sentence(Rng& rng, const Vocab& v, std::size_t topic, std::size_t n) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) s += ' ';
    s += draw_word(rng, v, topic, 0.7, 0.0);
  }
  return s;
}

std::vector<double> random_unit(Rng& rng, std::size_t dim) {
  std::vector<double> v(dim);
  for (double& x : v) x = rng.normal();
  return l2_normalized(std::move(v));
}

}  // namespace

std::string pair_sentence_id(std::size_t line, bool second) {
  return "p" + std::to_string(line) + (second ? "b" : "a");
}

Fixture make_fixture(const FixtureOptions& opts) {
  if (opts.n_docs < 2 || opts.doc_tokens == 0 || opts.sentence_tokens == 0 ||
      opts.teacher_dim < 2) {
    throw Error(ErrorCode::kInvalidConfig, "fixture needs >= 2 docs and non-empty texts");
  }
  WordMaker words(mix64(opts.seed ^ 0x0f1eULL));
  Vocab vocab;
  vocab.topics.resize(opts.n_docs);
  for (auto& t : vocab.topics)
    for (std::size_t i = 0; i < kTopicWords; ++i) t.push_back(words.make());
  for (std::size_t i = 0; i < kCommonWords; ++i) vocab.common.push_back(words.make());
  for (std::size_t i = 0; i < kFunctionWords; ++i) vocab.function.push_back(words.make());

  Fixture fx;
  Rng rng(mix64(opts.seed ^ 0xd0c5ULL));
  char id[32];
  for (std::size_t d = 0; d < opts.n_docs; ++d) {
    std::string text;
    for (std::size_t i = 0; i < opts.doc_tokens; ++i) {
      if (i) text += (i % 15 == 0) ? ". " : " ";
      text += draw_word(rng, vocab, d, 0.55, 0.1);
    }
    text += '.';
    std::snprintf(id, sizeof id, "d%02zu", d);
    fx.docs.push_back({id, std::move(text), "en"});
  }

  Rng qrng(mix64(opts.seed ^ 0x9e71ULL));
  std::size_t q = 0;
  for (std::size_t d = 0; d < opts.n_docs; ++d) {
    for (std::size_t k = 0; k < opts.queries_per_doc; ++k, ++q) {
      std::string text;
      for (std::size_t i = 0; i < opts.query_tokens; ++i) {
        if (i) text += ' ';
        text += draw_word(qrng, vocab, d, 0.75, 0.0);
      }
      std::snprintf(id, sizeof id, "q%03zu", q);
      fx.queries.push_back({id, std::move(text), fx.docs[d].doc_id});
    }
  }

  Rng prng(mix64(opts.seed ^ 0x9a125ULL));
  const std::size_t n_topics = opts.n_docs;
  const Regime regimes[] = {Regime::kSim, Regime::kNeutral, Regime::kDissim};
  for (Regime regime : regimes) {
    for (std::size_t k = 0; k < opts.pairs_per_regime; ++k) {
      const std::size_t ta = prng.below(n_topics);
      std::size_t tb = ta;
      double lo = 0.75, hi = 0.95;
      if (regime == Regime::kNeutral) {
        tb = (ta + 1) % n_topics;
        lo = 0.4;
        hi = 0.6;
      } else if (regime == Regime::kDissim) {
        tb = (ta + n_topics / 2) % n_topics;
        lo = 0.0;
        hi = 0.2;
      }
      PairRecord p;
      p.a = sentence(prng, vocab, ta, opts.sentence_tokens);
      p.b = sentence(prng, vocab, tb, opts.sentence_tokens);
      // Round to the precision written to TSV so file and memory agree.
      p.score = std::round(prng.uniform(lo, hi) * 1e6) / 1e6;
      p.regime = regime;
      fx.pairs.push_back(std::move(p));
    }
  }

  Rng trng(mix64(opts.seed ^ 0x7eac4ULL));
  for (std::size_t i = 0; i < fx.pairs.size(); ++i) {
    const double r = fx.pairs[i].score;
    const auto a = random_unit(trng, opts.teacher_dim);
    auto u = random_unit(trng, opts.teacher_dim);
    const double proj = dot(a, u);
    for (std::size_t j = 0; j < u.size(); ++j) u[j] -= proj * a[j];
    u = l2_normalized(std::move(u));
    std::vector<double> b(opts.teacher_dim);
    const double s = std::sqrt(1.0 - r * r);
    for (std::size_t j = 0; j < b.size(); ++j) b[j] = r * a[j] + s * u[j];
    b = l2_normalized(std::move(b));
    fx.teacher.push_back({a, pair_sentence_id(i + 1, false), Channel::kTeacher});
    fx.teacher.push_back({std::move(b), pair_sentence_id(i + 1, true), Channel::kTeacher});
  }
  return fx;
}

void write_fixture(const std::filesystem::path& dir, const Fixture& fixture) {
  std::filesystem::create_directories(dir);
  write_documents(dir / "corpus.jsonl", fixture.docs);
  write_queries(dir / "queries.jsonl", fixture.queries);
  write_pairs_tsv(dir / "pairs.tsv", fixture.pairs);
  write_embeddings_jsonl(dir / "teacher_pairs.jsonl", fixture.teacher);
}

}  // namespace qwb
