// Copyright 2026 The qwbench Authors
// SPDX-License-Identifier: Apache-2.0

// Embedding store: binary records of (owner_id, channel, float32 vector)
// with a JSON sidecar (<file>.json) carrying the producing fingerprint, plus
// a JSON Lines form {"id", "channel", "vec"} shared with external exporters.

#pragma once

#include <filesystem>
#include <vector>

#include "json.hpp"
#include "qwb/embed.hpp"

namespace qwb {

struct EmbeddingStore {
  std::vector<Embedding> records;
  nlohmann::json meta = nlohmann::json::object();  // sidecar contents

  std::string fingerprint() const { return meta.value("fingerprint", std::string{}); }
};

void save_embeddings(const std::filesystem::path& path, const std::vector<Embedding>& records,
                     const nlohmann::json& meta);

/// Loads .jsonl files through read_embeddings_jsonl(), anything else as the
/// binary format (sidecar optional).
EmbeddingStore load_embeddings(const std::filesystem::path& path);

void write_embeddings_jsonl(const std::filesystem::path& path,
                            const std::vector<Embedding>& records);

/// Vectors that are not unit length are normalized on load; all records
/// must share one dimension. Throws Error(kParse) / Error(kZeroVector).
std::vector<Embedding> read_embeddings_jsonl(const std::filesystem::path& path);

}  // namespace qwb
