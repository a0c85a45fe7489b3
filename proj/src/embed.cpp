// Copyright 2026 The qwbench Authors
// SPDX-License-Identifier: Apache-2.0

#include "qwb/embed.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "qwb/error.hpp"
#include "qwb/hashing.hpp"

namespace qwb {

using nlohmann::json;

std::string_view to_string(Channel channel) {
  switch (channel) {
    case Channel::kCurrent: return "current";
    case Channel::kAmp: return "amp";
    case Channel::kDistilled: return "distilled";
    case Channel::kTeacher: return "teacher";
  }
  return "current";
}

Channel channel_from_string(std::string_view name) {
  if (name == "current") return Channel::kCurrent;
  if (name == "amp") return Channel::kAmp;
  if (name == "distilled") return Channel::kDistilled;
  if (name == "teacher") return Channel::kTeacher;
  throw Error(ErrorCode::kParse, "unknown channel: " + std::string(name));
}

std::string_view to_string(AngleMode mode) {
  return mode == AngleMode::kEig ? "eig" : "lexical";
}

AngleMode angle_mode_from_string(std::string_view name) {
  if (name == "eig") return AngleMode::kEig;
  if (name == "lexical") return AngleMode::kLexical;
  throw Error(ErrorCode::kInvalidConfig, "unknown angle source: " + std::string(name));
}

void PipelineConfig::validate() const {
  seg.validate();
  circuit.validate();
  if (W == 0 || F == 0 || W * F != kEmbeddingDim) {
    throw Error(ErrorCode::kInvalidConfig, "W * F must equal 1024");
  }
  const std::size_t pool = 3 * circuit.n_qubits + ring_pairs(circuit.n_qubits).size() * 3;
  if (F > pool) {
    throw Error(ErrorCode::kObservablePoolExhausted,
                "F=" + std::to_string(F) + " exceeds the observable pool of " +
                    std::to_string(pool));
  }
  if (angle_source == AngleMode::kEig && axes.d_max < circuit.n_qubits) {
    throw Error(ErrorCode::kInvalidConfig, "axes.d_max must be >= n_qubits");
  }
}

json PipelineConfig::to_json() const {
  return json{
      {"segmentation",
       {{"chunk_tokens", seg.chunk_tokens},
        {"chunk_overlap", seg.chunk_overlap},
        {"sub_tokens", seg.sub_tokens},
        {"sub_stride", seg.sub_stride},
        {"window_tokens", seg.window_tokens},
        {"dense_stride", seg.dense_stride},
        {"two_phase_shift", seg.two_phase_shift}}},
      {"circuit",
       {{"n_qubits", circuit.n_qubits},
        {"n_layers", circuit.n_layers},
        {"shots", circuit.shots},
        {"seed", circuit.seed}}},
      {"axes",
       {{"d_max", axes.d_max},
        {"context", axes.context},
        {"gamma", axes.gamma},
        {"epsilon", axes.epsilon},
        {"scaling", to_string(axes.scaling)}}},
      {"angle_source", to_string(angle_source)},
      {"W", W},
      {"F", F},
      {"qks_episodes", qks_episodes},
      {"multiscale", multiscale},
      {"channel", to_string(channel)},
  };
}

namespace {

void check_keys(const json& j, std::initializer_list<std::string_view> allowed,
                std::string_view where) {
  if (!j.is_object()) {
    throw Error(ErrorCode::kInvalidConfig, std::string(where) + " must be an object");
  }
  for (const auto& item : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      throw Error(ErrorCode::kInvalidConfig,
                  "unknown key '" + item.key() + "' in " + std::string(where));
    }
  }
}

template <typename T>
void read_into(const json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const json& j) {
  PipelineConfig cfg;
  try {
    check_keys(j, {"segmentation", "circuit", "axes", "angle_source", "W", "F", "qks_episodes",
                   "multiscale", "channel"},
               "pipeline config");
    if (j.contains("segmentation")) {
      const auto& s = j.at("segmentation");
      check_keys(s, {"chunk_tokens", "chunk_overlap", "sub_tokens", "sub_stride",
                     "window_tokens", "dense_stride", "two_phase_shift"},
                 "segmentation");
      read_into(s, "chunk_tokens", cfg.seg.chunk_tokens);
      read_into(s, "chunk_overlap", cfg.seg.chunk_overlap);
      read_into(s, "sub_tokens", cfg.seg.sub_tokens);
      read_into(s, "sub_stride", cfg.seg.sub_stride);
      read_into(s, "window_tokens", cfg.seg.window_tokens);
      read_into(s, "dense_stride", cfg.seg.dense_stride);
      read_into(s, "two_phase_shift", cfg.seg.two_phase_shift);
    }
    if (j.contains("circuit")) {
      const auto& c = j.at("circuit");
      check_keys(c, {"n_qubits", "n_layers", "shots", "seed"}, "circuit");
      read_into(c, "n_qubits", cfg.circuit.n_qubits);
      read_into(c, "n_layers", cfg.circuit.n_layers);
      read_into(c, "shots", cfg.circuit.shots);
      read_into(c, "seed", cfg.circuit.seed);
    }
    if (j.contains("axes")) {
      const auto& a = j.at("axes");
      check_keys(a, {"d_max", "context", "gamma", "epsilon", "scaling"}, "axes");
      read_into(a, "d_max", cfg.axes.d_max);
      read_into(a, "context", cfg.axes.context);
      read_into(a, "gamma", cfg.axes.gamma);
      read_into(a, "epsilon", cfg.axes.epsilon);
      if (a.contains("scaling")) {
        cfg.axes.scaling = axis_scaling_from_string(a.at("scaling").get<std::string>());
      }
    }
    if (j.contains("angle_source")) {
      cfg.angle_source = angle_mode_from_string(j.at("angle_source").get<std::string>());
    }
    read_into(j, "W", cfg.W);
    read_into(j, "F", cfg.F);
    read_into(j, "qks_episodes", cfg.qks_episodes);
    read_into(j, "multiscale", cfg.multiscale);
    if (j.contains("channel")) cfg.channel = channel_from_string(j.at("channel").get<std::string>());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("pipeline config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

Fingerprint fingerprint(const PipelineConfig& cfg) {
  json canonical = cfg.to_json();
  // Fixed construction choices are part of the digest so that changing them
  // in code invalidates stored artifacts.
  canonical["fixed"] = {
      {"format", "qwb-pipeline/1"},
      {"layer_scale", "1/(l+1)"},
      {"observable_order", "Z,X,Y,ZZ,XX,YY ring"},
      {"resample", "even-split mean, backfill"},
      {"amp_channel", "amplitude(expectations) -> expectations"},
      {"qks_fusion", "mean over episodes"},
      {"multiscale", "mean of views then l2"},
      {"cooccurrence", "symmetric window, log1p"},
  };
  Fingerprint fp;
  fp.canonical_config = canonical.dump();  // object keys are sorted
  fp.digest = sha256_hex(fp.canonical_config);
  return fp;
}

std::vector<std::vector<double>> resample_windows(std::span<const WindowFeatures> features,
                                                  std::size_t W) {
  const std::size_t K = features.size();
  if (K == 0) throw Error(ErrorCode::kNoWindows, "no window features to resample");
  if (W == 0) throw Error(ErrorCode::kInvalidConfig, "W must be positive");
  const std::size_t F = features.front().f.size();
  std::vector<std::vector<double>> slots(W);
  for (std::size_t j = 0; j < W; ++j) {
    const std::size_t lo = j * K / W;
    const std::size_t hi = (j + 1) * K / W;
    if (lo == hi) {
      // Only possible when K < W, where every non-empty cell holds exactly
      // one window. Leading empty cells take the first window.
      if (j > 0) {
        slots[j] = slots[j - 1];
        continue;
      }
      slots[j] = features.front().f;
      continue;
    }
    std::vector<double> mean(F, 0.0);
    for (std::size_t i = lo; i < hi; ++i) {
      if (features[i].f.size() != F) {
        throw Error(ErrorCode::kDimensionMismatch, "window feature sizes differ");
      }
      for (std::size_t c = 0; c < F; ++c) mean[c] += features[i].f[c];
    }
    for (auto& v : mean) v /= static_cast<double>(hi - lo);
    slots[j] = std::move(mean);
  }
  return slots;
}

std::vector<double> concat_slots(const std::vector<std::vector<double>>& slots) {
  std::vector<double> out;
  for (const auto& s : slots) out.insert(out.end(), s.begin(), s.end());
  return out;
}

std::vector<double> l2_normalized(std::vector<double> v) {
  double norm2 = 0.0;
  for (double x : v) norm2 += x * x;
  if (!(norm2 > 0.0) || !std::isfinite(norm2)) {
    throw Error(ErrorCode::kAllZeroEmbedding, "cannot normalize a zero (or non-finite) vector");
  }
  const double inv = 1.0 / std::sqrt(norm2);
  for (double& x : v) x *= inv;
  return v;
}

Embedding assemble(std::span<const WindowFeatures> features, const PipelineConfig& cfg,
                   std::string owner_id) {
  if (cfg.W * cfg.F != kEmbeddingDim) {
    throw Error(ErrorCode::kDimensionMismatch, "W * F must equal 1024");
  }
  for (const auto& wf : features) {
    if (wf.f.size() != cfg.F) {
      throw Error(ErrorCode::kDimensionMismatch, "window has " + std::to_string(wf.f.size()) +
                                                     " features, expected " +
                                                     std::to_string(cfg.F));
    }
  }
  return {l2_normalized(concat_slots(resample_windows(features, cfg.W))), std::move(owner_id),
          cfg.channel};
}

std::vector<double> circuit_features(std::span<const double> theta, const ObservableSet& obs,
                                     const PipelineConfig& cfg, std::uint64_t seed) {
  const StateVector psi = ansatz_state(theta, cfg.circuit);
  std::vector<double> f = expectations(psi, obs, cfg.circuit.shots, seed);
  if (cfg.channel == Channel::kAmp) {
    const StateVector amp = amplitude_state(f, cfg.circuit.n_qubits);
    f = expectations(amp, obs, cfg.circuit.shots, mix64(seed ^ 0xa3ULL));
  }
  return f;
}

std::vector<WindowFeatures> window_features(const TokenSeq& tokens, std::string_view unit_id,
                                            const SemanticAxes* axes,
                                            const PipelineConfig& cfg, EmbedStats* stats) {
  const ObservableSet obs = default_observables(cfg.circuit.n_qubits, cfg.F);
  const SemanticAxes* use_axes = cfg.angle_source == AngleMode::kEig ? axes : nullptr;
  std::vector<QksEpisode> episodes;
  if (cfg.qks_episodes > 0) {
    episodes = qks_episodes(cfg.circuit.n_qubits, cfg.qks_episodes, cfg.circuit.seed);
  }
  const auto windows = windows_of(tokens, cfg.seg.window_tokens);
  std::vector<WindowFeatures> out;
  out.reserve(windows.size());
  for (std::size_t w = 0; w < windows.size(); ++w) {
    const AngleVector angles =
        window_angles(windows[w].tokens, use_axes, cfg.circuit.n_qubits);
    if (stats) {
      (angles.source == AngleSource::kEig ? stats->eig_windows : stats->lexical_windows) += 1;
    }
    const std::uint64_t seed = derive_seed(cfg.circuit.seed, unit_id, w);
    std::vector<double> f;
    if (episodes.empty()) {
      f = circuit_features(angles.theta, obs, cfg, seed);
    } else {
      f.assign(cfg.F, 0.0);
      for (std::size_t e = 0; e < episodes.size(); ++e) {
        const auto theta_e = qks_apply(angles.theta, episodes[e]);
        const auto fe = circuit_features(theta_e, obs, cfg, derive_seed(seed, "qks", e));
        for (std::size_t c = 0; c < cfg.F; ++c) f[c] += fe[c];
      }
      for (double& v : f) v /= static_cast<double>(episodes.size());
    }
    out.push_back({std::move(f), std::string(unit_id), w});
  }
  return out;
}

std::vector<double> embed_view(const TokenSeq& tokens, std::string_view unit_id,
                               const SemanticAxes* axes, const PipelineConfig& cfg,
                               EmbedStats* stats) {
  const auto features = window_features(tokens, unit_id, axes, cfg, stats);
  return concat_slots(resample_windows(features, cfg.W));
}

Embedding embed_tokens(const TokenSeq& tokens, std::string owner_id, const SemanticAxes* axes,
                       const PipelineConfig& cfg, EmbedStats* stats) {
  const auto features = window_features(tokens, owner_id, axes, cfg, stats);
  return assemble(features, cfg, std::move(owner_id));
}

Embedding embed_subchunk(const SubChunk& sub, const SemanticAxes* axes,
                         const PipelineConfig& cfg, EmbedStats* stats) {
  return embed_tokens(sub.tokens, sub.sub_id, axes, cfg, stats);
}

Embedding multiscale_fuse(std::span<const std::vector<double>> views, std::string owner_id,
                          Channel channel) {
  if (views.empty()) throw Error(ErrorCode::kNoWindows, "multiscale fusion needs >= 1 view");
  std::vector<double> mean(views.front().size(), 0.0);
  for (const auto& v : views) {
    if (v.size() != mean.size()) {
      throw Error(ErrorCode::kDimensionMismatch, "view dimensions differ");
    }
    for (std::size_t i = 0; i < v.size(); ++i) mean[i] += v[i];
  }
  for (double& x : mean) x /= static_cast<double>(views.size());
  return {l2_normalized(std::move(mean)), std::move(owner_id), channel};
}

std::vector<const SubChunk*> views_of(const SubChunk& base, const SegmentedDocument& doc,
                                      const PipelineConfig& cfg) {
  std::vector<const SubChunk*> views{&base};
  const auto hash = base.sub_id.rfind("#s");
  const std::string twin_id =
      hash == std::string::npos ? std::string{} : base.sub_id.substr(0, hash) + "#p" +
                                                      base.sub_id.substr(hash + 2);
  for (const auto& s : doc.subchunks) {
    if (s.chunk_id != base.chunk_id) continue;
    if (s.role == SubChunkRole::kPhase && s.sub_id == twin_id) views.push_back(&s);
    if (cfg.multiscale && s.role == SubChunkRole::kDense &&
        s.token_span.begin > base.token_span.begin &&
        s.token_span.begin < base.token_span.end) {
      views.push_back(&s);
    }
  }
  return views;
}

std::vector<Embedding> embed_document(const SegmentedDocument& doc, const SemanticAxes* axes,
                                      const PipelineConfig& cfg, EmbedStats* stats) {
  std::vector<Embedding> out;
  for (const auto& sub : doc.subchunks) {
    if (sub.role != SubChunkRole::kBase) continue;
    const auto views = views_of(sub, doc, cfg);
    if (views.size() == 1) {
      out.push_back(embed_subchunk(sub, axes, cfg, stats));
      continue;
    }
    std::vector<std::vector<double>> raw;
    for (const SubChunk* v : views) raw.push_back(embed_view(v->tokens, v->sub_id, axes, cfg, stats));
    out.push_back(multiscale_fuse(raw, sub.sub_id, cfg.channel));
  }
  return out;
}

Embedding document_embedding(std::span<const Embedding> subs, std::string doc_id) {
  if (subs.empty()) throw Error(ErrorCode::kNoWindows, "document has no sub-chunk embeddings");
  std::vector<double> mean(subs.front().vec.size(), 0.0);
  for (const auto& e : subs) {
    if (e.vec.size() != mean.size()) throw Error(ErrorCode::kDimensionMismatch, "dim mismatch");
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += e.vec[i];
  }
  return {l2_normalized(std::move(mean)), std::move(doc_id), subs.front().channel};
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::kDimensionMismatch, "dot: size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double cosine(std::span<const double> a, std::span<const double> b) {
  const double na = std::sqrt(dot(a, a));
  const double nb = std::sqrt(dot(b, b));
  if (!(na > 0.0) || !(nb > 0.0)) throw Error(ErrorCode::kZeroVector, "cosine of zero vector");
  return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

}  // namespace qwb
