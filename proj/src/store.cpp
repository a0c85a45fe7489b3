// Copyright 2026 The qwbench Authors
// SPDX-License-Identifier: Apache-2.0

#include "qwb/store.hpp"

#include <cmath>
#include <fstream>

#include "binio.hpp"
#include "qwb/error.hpp"

namespace qwb {

namespace {
constexpr char kEmbMagic[9] = "QWBEMB01";

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
  return std::filesystem::path(path.string() + ".json");
}
}  // namespace

void save_embeddings(const std::filesystem::path& path, const std::vector<Embedding>& records,
                     const nlohmann::json& meta) {
  const std::uint32_t dim = records.empty() ? 0 : static_cast<std::uint32_t>(records[0].vec.size());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  binio::put_magic(out, kEmbMagic);
  binio::put<std::uint64_t>(out, records.size());
  binio::put<std::uint32_t>(out, dim);
  std::vector<float> buf(dim);
  for (const auto& r : records) {
    if (r.vec.size() != dim) throw Error(ErrorCode::kDimensionMismatch, "mixed dimensions in store");
    binio::put_string(out, r.owner_id);
    binio::put<std::uint8_t>(out, static_cast<std::uint8_t>(r.channel));
    for (std::uint32_t i = 0; i < dim; ++i) buf[i] = static_cast<float>(r.vec[i]);
    binio::put_array(out, buf.data(), dim);
  }
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());

  nlohmann::json side = meta;
  side["count"] = records.size();
  side["dim"] = dim;
  std::ofstream sout(sidecar_path(path));
  if (!sout) throw Error(ErrorCode::kIo, "cannot write sidecar for " + path.string());
  sout << side.dump(2) << '\n';
}

EmbeddingStore load_embeddings(const std::filesystem::path& path) {
  EmbeddingStore store;
  if (path.extension() == ".jsonl") {
    store.records = read_embeddings_jsonl(path);
    return store;
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  binio::expect_magic(in, kEmbMagic);
  const auto count = binio::get<std::uint64_t>(in);
  const auto dim = binio::get<std::uint32_t>(in);
  std::vector<float> buf(dim);
  store.records.reserve(count);
  for (std::uint64_t k = 0; k < count; ++k) {
    Embedding e;
    e.owner_id = binio::get_string(in);
    e.channel = static_cast<Channel>(binio::get<std::uint8_t>(in));
    binio::get_array(in, buf.data(), dim);
    e.vec.assign(buf.begin(), buf.end());
    store.records.push_back(std::move(e));
  }
  std::ifstream sin(sidecar_path(path));
  if (sin) {
    try {
      store.meta = nlohmann::json::parse(sin);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParse, "bad sidecar for " + path.string() + ": " + e.what());
    }
  }
  return store;
}

void write_embeddings_jsonl(const std::filesystem::path& path,
                            const std::vector<Embedding>& records) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  for (const auto& r : records) {
    out << nlohmann::json{{"id", r.owner_id}, {"channel", to_string(r.channel)}, {"vec", r.vec}}
               .dump()
        << '\n';
  }
}

std::vector<Embedding> read_embeddings_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<Embedding> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    Embedding e;
    try {
      const auto j = nlohmann::json::parse(line);
      e.owner_id = j.at("id").get<std::string>();
      e.channel = channel_from_string(j.value("channel", std::string{"teacher"}));
      e.vec = j.at("vec").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& ex) {
      throw Error(ErrorCode::kParse, where + ": " + ex.what());
    }
    if (!out.empty() && e.vec.size() != out.front().vec.size()) {
      throw Error(ErrorCode::kDimensionMismatch, where + ": dimension differs from first record");
    }
    double norm2 = 0.0;
    for (double x : e.vec) norm2 += x * x;
    if (!(norm2 > 0.0) || !std::isfinite(norm2)) {
      throw Error(ErrorCode::kZeroVector, where + ": zero or non-finite vector");
    }
    if (std::abs(std::sqrt(norm2) - 1.0) > 1e-12) {
      const double inv = 1.0 / std::sqrt(norm2);
      for (double& x : e.vec) x *= inv;
    }
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace qwb
