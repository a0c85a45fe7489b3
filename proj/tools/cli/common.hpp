// Copyright 2026 The qwbench Authors
// SPDX-License-Identifier: Apache-2.0

// Shared plumbing for the qwb subcommands: config merging, run manifests and
// the segmented-corpus store.

#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qwb/corpus.hpp"
#include "qwb/embed.hpp"

namespace qwb::cli {

inline constexpr const char* kVersion = "0.1.0";

namespace fs = std::filesystem;

/// Reads a JSON config file; an empty path yields an empty object.
nlohmann::json load_config(const std::string& path);

/// Flag overrides for the pipeline section of the config.
struct PipelineFlags {
  std::optional<std::size_t> chunk_tokens, chunk_overlap, sub_tokens, sub_stride, window_tokens,
      dense_stride, two_phase_shift;
  std::optional<std::size_t> n_qubits, n_layers, shots;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> d_max, context;
  std::optional<double> gamma;
  std::optional<std::string> scaling, angle_source, channel;
  std::optional<std::size_t> W, F, qks_episodes;
  bool multiscale = false;

  void add_to(CLI::App* app);
};

/// config["pipeline"] with flag overrides applied, validated.
PipelineConfig effective_pipeline(const nlohmann::json& config, const PipelineFlags& flags);

/// Run manifest written as <out>/manifest.json.
class Manifest {
 public:
  Manifest(std::string command, fs::path out_dir);

  void set_config(const nlohmann::json& effective);
  void set_fingerprint(const std::string& digest) { fingerprint_ = digest; }
  void add_input(const fs::path& path);
  void add_output(const fs::path& path);
  void set(const std::string& key, nlohmann::json value) { extra_[key] = std::move(value); }
  void write() const;

 private:
  std::string command_;
  fs::path out_dir_;
  nlohmann::json config_ = nlohmann::json::object();
  std::string fingerprint_;
  nlohmann::json inputs_ = nlohmann::json::object();
  std::vector<std::string> outputs_;
  nlohmann::json extra_ = nlohmann::json::object();
  std::chrono::steady_clock::time_point start_;
};

/// Creates the directory (and parents) if needed.
fs::path prepare_out_dir(const std::string& dir);

struct SegmentStore {
  SegmentationConfig seg;
  std::vector<SegmentedDocument> docs;
};

/// JSON Lines, one document per line, plus a "<path>.json" sidecar holding the
/// segmentation config.
void write_segments(const fs::path& path, const SegmentStore& store);
SegmentStore read_segments(const fs::path& path);

nlohmann::json segmentation_to_json(const SegmentationConfig& seg);

void write_json(const fs::path& path, const nlohmann::json& j);
nlohmann::json read_json(const fs::path& path);

}  // namespace qwb::cli
