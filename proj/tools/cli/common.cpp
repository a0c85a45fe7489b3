// Copyright 2026 The qwbench Authors
// SPDX-License-Identifier: Apache-2.0

#include "common.hpp"

#include <Eigen/Core>
#include <fstream>

#include "qwb/error.hpp"
#include "qwb/hashing.hpp"

namespace qwb::cli {

using nlohmann::json;

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  auto j = read_json(path);
  if (!j.is_object()) throw Error(ErrorCode::kInvalidConfig, "config must be a JSON object");
  return j;
}

void PipelineFlags::add_to(CLI::App* app) {
  const char* group = "Pipeline";
  app->add_option("--chunk-tokens", chunk_tokens, "Logical chunk size in tokens")->group(group);
  app->add_option("--chunk-overlap", chunk_overlap)->group(group);
  app->add_option("--sub-tokens", sub_tokens, "Sub-chunk size in tokens")->group(group);
  app->add_option("--sub-stride", sub_stride)->group(group);
  app->add_option("--window-tokens", window_tokens)->group(group);
  app->add_option("--dense-stride", dense_stride, "Dense sub-chunk stride (0 = off)")->group(group);
  app->add_option("--two-phase-shift", two_phase_shift, "Second-pass shift (0 = off)")->group(group);
  app->add_option("--n-qubits", n_qubits)->group(group);
  app->add_option("--layers", n_layers)->group(group);
  app->add_option("--shots", shots, "0 = analytic expectations")->group(group);
  app->add_option("--seed", seed)->group(group);
  app->add_option("--d-max", d_max)->group(group);
  app->add_option("--context", context, "Co-occurrence window radius")->group(group);
  app->add_option("--gamma", gamma)->group(group);
  app->add_option("--scaling", scaling, "u | u_sigma | u_sqrt_sigma")->group(group);
  app->add_option("--angle-source", angle_source, "eig | lexical")->group(group);
  app->add_option("--channel", channel, "current | amp")->group(group);
  app->add_option("--W", W, "Window slots")->group(group);
  app->add_option("--F", F, "Features per window")->group(group);
  app->add_option("--qks-episodes", qks_episodes)->group(group);
  app->add_flag("--multiscale", multiscale, "Fuse phase and dense views")->group(group);
}

PipelineConfig effective_pipeline(const json& config, const PipelineFlags& f) {
  PipelineConfig cfg = PipelineConfig::from_json(config.value("pipeline", json::object()));
  auto set = [](auto& dst, const auto& src) {
    if (src) dst = *src;
  };
  set(cfg.seg.chunk_tokens, f.chunk_tokens);
  set(cfg.seg.chunk_overlap, f.chunk_overlap);
  set(cfg.seg.sub_tokens, f.sub_tokens);
  set(cfg.seg.sub_stride, f.sub_stride);
  set(cfg.seg.window_tokens, f.window_tokens);
  set(cfg.seg.dense_stride, f.dense_stride);
  set(cfg.seg.two_phase_shift, f.two_phase_shift);
  set(cfg.circuit.n_qubits, f.n_qubits);
  set(cfg.circuit.n_layers, f.n_layers);
  set(cfg.circuit.shots, f.shots);
  set(cfg.circuit.seed, f.seed);
  set(cfg.axes.d_max, f.d_max);
  set(cfg.axes.context, f.context);
  set(cfg.axes.gamma, f.gamma);
  if (f.scaling) cfg.axes.scaling = axis_scaling_from_string(*f.scaling);
  if (f.angle_source) cfg.angle_source = angle_mode_from_string(*f.angle_source);
  if (f.channel) cfg.channel = channel_from_string(*f.channel);
  set(cfg.W, f.W);
  set(cfg.F, f.F);
  set(cfg.qks_episodes, f.qks_episodes);
  if (f.multiscale) cfg.multiscale = true;
  cfg.validate();
  return cfg;
}

Manifest::Manifest(std::string command, fs::path out_dir)
    : command_(std::move(command)), out_dir_(std::move(out_dir)),
      start_(std::chrono::steady_clock::now()) {}

void Manifest::set_config(const json& effective) {
  config_ = effective;
  if (fingerprint_.empty()) fingerprint_ = sha256_hex(effective.dump());
}

void Manifest::add_input(const fs::path& path) {
  inputs_[path.string()] = sha256_file(path);
}

void Manifest::add_output(const fs::path& path) {
  outputs_.push_back(path.lexically_relative(out_dir_).string());
}

void Manifest::write() const {
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  json m{{"command", command_},
         {"fingerprint", fingerprint_},
         {"config", config_},
         {"inputs", inputs_},
         {"outputs", outputs_},
         {"wall_time_s", wall},
         {"versions",
          {{"qwb", kVersion},
           {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                         "." + std::to_string(EIGEN_MINOR_VERSION)},
           {"compiler", __VERSION__}}}};
  for (const auto& [k, v] : extra_.items()) m[k] = v;
  write_json(out_dir_ / "manifest.json", m);
}

fs::path prepare_out_dir(const std::string& dir) {
  if (dir.empty()) throw Error(ErrorCode::kInvalidConfig, "--out is required");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir + ": " + ec.message());
  return fs::path(dir);
}

json segmentation_to_json(const SegmentationConfig& seg) {
  PipelineConfig p;
  p.seg = seg;
  return p.to_json().at("segmentation");
}

void write_segments(const fs::path& path, const SegmentStore& store) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  for (const auto& d : store.docs) {
    json offsets = json::array();
    for (const auto& s : d.tokens.offsets) offsets.push_back({s.begin, s.end});
    json chunks = json::array();
    for (const auto& c : d.chunks) {
      chunks.push_back({{"chunk_id", c.chunk_id}, {"begin", c.doc_span.begin}, {"end", c.doc_span.end}});
    }
    json subs = json::array();
    for (const auto& s : d.subchunks) {
      subs.push_back({{"sub_id", s.sub_id},
                      {"chunk_id", s.chunk_id},
                      {"role", to_string(s.role)},
                      {"doc_begin", s.doc_span.begin},
                      {"doc_end", s.doc_span.end},
                      {"token_begin", s.token_span.begin},
                      {"token_end", s.token_span.end},
                      {"phase_shift", s.phase_shift}});
    }
    out << json{{"doc_id", d.doc_id},
                {"tokens", d.tokens.tokens},
                {"offsets", offsets},
                {"chunks", chunks},
                {"subchunks", subs}}
               .dump()
        << '\n';
  }
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
  write_json(path.string() + ".json", {{"segmentation", segmentation_to_json(store.seg)},
                                       {"documents", store.docs.size()}});
}

SegmentStore read_segments(const fs::path& path) {
  SegmentStore store;
  const fs::path side = path.string() + ".json";
  if (fs::exists(side)) {
    PipelineConfig p = PipelineConfig::from_json(
        json{{"segmentation", read_json(side).at("segmentation")}});
    store.seg = p.seg;
  }
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = json::parse(line);
      SegmentedDocument d;
      d.doc_id = j.at("doc_id").get<std::string>();
      d.tokens.tokens = j.at("tokens").get<std::vector<std::string>>();
      for (const auto& o : j.at("offsets")) {
        d.tokens.offsets.push_back({o.at(0).get<std::size_t>(), o.at(1).get<std::size_t>()});
      }
      for (const auto& c : j.at("chunks")) {
        d.chunks.push_back({c.at("chunk_id").get<std::string>(), d.doc_id,
                            {c.at("begin").get<std::size_t>(), c.at("end").get<std::size_t>()}});
      }
      for (const auto& s : j.at("subchunks")) {
        SubChunk sub;
        sub.sub_id = s.at("sub_id").get<std::string>();
        sub.doc_id = d.doc_id;
        sub.chunk_id = s.at("chunk_id").get<std::string>();
        sub.role = sub_chunk_role_from_string(s.at("role").get<std::string>());
        sub.doc_span = {s.at("doc_begin").get<std::size_t>(), s.at("doc_end").get<std::size_t>()};
        sub.token_span = {s.at("token_begin").get<std::size_t>(), s.at("token_end").get<std::size_t>()};
        sub.phase_shift = s.at("phase_shift").get<std::size_t>();
        if (sub.doc_span.end > d.tokens.size() || sub.doc_span.begin > sub.doc_span.end) {
          throw Error(ErrorCode::kParse, "sub-chunk span out of range");
        }
        sub.tokens = slice(d.tokens, sub.doc_span);
        d.subchunks.push_back(std::move(sub));
      }
      store.docs.push_back(std::move(d));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kParse, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return store;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
}

}  // namespace qwb::cli
