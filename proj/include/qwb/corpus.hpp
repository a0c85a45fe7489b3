// Copyright 2026 The qwbench Authors
// SPDX-License-Identifier: Apache-2.0

// Document ingestion and segmentation: tokenization, logical chunks,
// sub-chunks (the encoding units) and fixed-size token windows.

#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace qwb {

struct Document {
  std::string doc_id;
  std::string text;
  std::string lang;
};

/// A query with exactly one relevant document.
struct Query {
  std::string qid;
  std::string text;
  std::string relevant_doc;
};

/// Half-open index range [begin, end).
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  friend bool operator==(const Span&, const Span&) = default;
};

struct TokenSeq {
  std::vector<std::string> tokens;
  /// Byte spans into the source text, one per token.
  std::vector<Span> offsets;

  std::size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
};

TokenSeq slice(const TokenSeq& seq, Span span);

struct SegmentationConfig {
  std::size_t chunk_tokens = 384;
  std::size_t chunk_overlap = 64;
  std::size_t sub_tokens = 256;
  std::size_t sub_stride = 179;
  std::size_t window_tokens = 16;
  /// Stride of the extra dense sub-chunk stream; 0 disables it.
  std::size_t dense_stride = 0;
  /// Shift of the second sub-chunk pass; 0 disables it.
  std::size_t two_phase_shift = 0;

  /// Throws Error(kInvalidConfig) when an invariant does not hold.
  void validate() const;
};

enum class SubChunkRole { kBase, kPhase, kDense };

std::string_view to_string(SubChunkRole role);
SubChunkRole sub_chunk_role_from_string(std::string_view name);

struct Chunk {
  std::string chunk_id;
  std::string doc_id;
  Span doc_span;
};

struct SubChunk {
  std::string sub_id;
  std::string doc_id;
  std::string chunk_id;
  TokenSeq tokens;
  Span token_span;  // chunk-relative token indices
  Span doc_span;    // document-relative token indices
  std::size_t phase_shift = 0;
  SubChunkRole role = SubChunkRole::kBase;
};

struct Window {
  std::string sub_id;
  std::size_t window_index = 0;
  TokenSeq tokens;
};

struct SegmentedDocument {
  std::string doc_id;
  TokenSeq tokens;
  std::vector<Chunk> chunks;
  /// Base pass first (in chunk order), then phase-shifted and dense pieces
  /// of each chunk, all tagged by role.
  std::vector<SubChunk> subchunks;
};

/// Lowercased Unicode-word tokens (letters, digits and combining marks);
/// everything else separates tokens. Throws Error(kEmptyText) when no token
/// survives.
TokenSeq tokenize(std::string_view text);

/// Cuts [0, length) into pieces of `size` starting every `step` tokens,
/// stopping at the first piece that reaches the end. A trailing piece shorter
/// than a quarter of `size` is anchored to the end at full size instead.
std::vector<Span> tile(std::size_t length, std::size_t size, std::size_t step);

/// Number of pieces tile() yields: 1 if length <= size, otherwise
/// 1 + ceil((length - size) / step).
std::size_t tile_count(std::size_t length, std::size_t size, std::size_t step);

SegmentedDocument segment(const Document& doc, const SegmentationConfig& cfg);

/// Contiguous, non-overlapping windows; the last one may be shorter.
std::vector<Window> windows_of(const SubChunk& sub, std::size_t window_tokens);
std::vector<TokenSeq> windows_of(const TokenSeq& tokens,
                                 std::size_t window_tokens);

// JSON Lines readers. Corpus lines: {"doc_id","text","lang"}; query lines:
// {"qid","text","relevant_doc"}. Throw Error(kParse) with the line number.
std::vector<Document> read_documents(const std::filesystem::path& path);
std::vector<Query> read_queries(const std::filesystem::path& path);
void write_documents(const std::filesystem::path& path,
                     const std::vector<Document>& docs);
void write_queries(const std::filesystem::path& path,
                   const std::vector<Query>& queries);

}  // namespace qwb
