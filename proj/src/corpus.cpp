// Copyright 2026 The qwbench Authors
// SPDX-License-Identifier: Apache-2.0

#include "qwb/corpus.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <fstream>
#include <set>

#include "json.hpp"
#include "qwb/error.hpp"

namespace qwb {

TokenSeq slice(const TokenSeq& seq, Span span) {
  TokenSeq out;
  out.tokens.assign(seq.tokens.begin() + static_cast<std::ptrdiff_t>(span.begin),
                    seq.tokens.begin() + static_cast<std::ptrdiff_t>(span.end));
  out.offsets.assign(seq.offsets.begin() + static_cast<std::ptrdiff_t>(span.begin),
                     seq.offsets.begin() + static_cast<std::ptrdiff_t>(span.end));
  return out;
}

void SegmentationConfig::validate() const {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidConfig, "segmentation: " + what);
  };
  if (chunk_tokens == 0) fail("chunk_tokens must be positive");
  if (chunk_overlap >= chunk_tokens) fail("chunk_overlap must be < chunk_tokens");
  if (sub_tokens == 0) fail("sub_tokens must be positive");
  if (sub_stride == 0 || sub_stride > sub_tokens)
    fail("sub_stride must be in (0, sub_tokens]");
  if (window_tokens == 0) fail("window_tokens must be positive");
}

std::string_view to_string(SubChunkRole role) {
  switch (role) {
    case SubChunkRole::kBase: return "base";
    case SubChunkRole::kPhase: return "phase";
    case SubChunkRole::kDense: return "dense";
  }
  return "base";
}

SubChunkRole sub_chunk_role_from_string(std::string_view name) {
  if (name == "base") return SubChunkRole::kBase;
  if (name == "phase") return SubChunkRole::kPhase;
  if (name == "dense") return SubChunkRole::kDense;
  throw Error(ErrorCode::kParse, "unknown sub-chunk role: " + std::string(name));
}

namespace {

bool is_word_char(UChar32 c) {
  if (u_isalnum(c)) return true;
  const auto type = u_charType(c);
  return type == U_NON_SPACING_MARK || type == U_COMBINING_SPACING_MARK ||
         type == U_ENCLOSING_MARK;
}

}  // namespace

TokenSeq tokenize(std::string_view text) {
  TokenSeq out;
  const auto* s = reinterpret_cast<const uint8_t*>(text.data());
  const auto length = static_cast<int32_t>(text.size());
  int32_t i = 0;
  std::string current;
  std::size_t begin = 0;
  bool in_word = false;
  while (i < length) {
    const int32_t start = i;
    UChar32 c = 0;
    U8_NEXT(s, i, length, c);
    const bool word = c >= 0 && is_word_char(c);
    if (word) {
      if (!in_word) {
        in_word = true;
        begin = static_cast<std::size_t>(start);
        current.clear();
      }
      const UChar32 lower = u_tolower(c);
      char buf[U8_MAX_LENGTH];
      int32_t n = 0;
      UBool error = false;
      U8_APPEND(reinterpret_cast<uint8_t*>(buf), n, U8_MAX_LENGTH, lower, error);
      if (error) continue;
      current.append(buf, static_cast<std::size_t>(n));
    } else if (in_word) {
      in_word = false;
      out.tokens.push_back(current);
      out.offsets.push_back({begin, static_cast<std::size_t>(start)});
    }
  }
  if (in_word) {
    out.tokens.push_back(current);
    out.offsets.push_back({begin, text.size()});
  }
  if (out.empty()) throw Error(ErrorCode::kEmptyText, "text has no word tokens");
  return out;
}

std::vector<Span> tile(std::size_t length, std::size_t size, std::size_t step) {
  std::vector<Span> pieces;
  if (length == 0) return pieces;
  for (std::size_t start = 0;; start += step) {
    const std::size_t end = std::min(start + size, length);
    pieces.push_back({start, end});
    if (end == length) break;
  }
  if (pieces.size() > 1 && pieces.back().size() * 4 < size) {
    pieces.back() = {length - size, length};
  }
  return pieces;
}

std::size_t tile_count(std::size_t length, std::size_t size, std::size_t step) {
  if (length == 0) return 0;
  if (length <= size) return 1;
  return 1 + (length - size + step - 1) / step;
}

SegmentedDocument segment(const Document& doc, const SegmentationConfig& cfg) {
  cfg.validate();
  SegmentedDocument out;
  out.doc_id = doc.doc_id;
  out.tokens = tokenize(doc.text);

  const auto chunk_spans =
      tile(out.tokens.size(), cfg.chunk_tokens, cfg.chunk_tokens - cfg.chunk_overlap);
  for (std::size_t c = 0; c < chunk_spans.size(); ++c) {
    Chunk chunk{doc.doc_id + "#c" + std::to_string(c), doc.doc_id, chunk_spans[c]};
    const std::size_t chunk_len = chunk.doc_span.size();

    auto emit = [&](Span local, std::string suffix, std::size_t shift,
                    SubChunkRole role) {
      SubChunk sub;
      sub.sub_id = chunk.chunk_id + suffix;
      sub.doc_id = doc.doc_id;
      sub.chunk_id = chunk.chunk_id;
      sub.token_span = local;
      sub.doc_span = {chunk.doc_span.begin + local.begin,
                      chunk.doc_span.begin + local.end};
      sub.tokens = slice(out.tokens, sub.doc_span);
      sub.phase_shift = shift;
      sub.role = role;
      out.subchunks.push_back(std::move(sub));
    };

    const auto base = tile(chunk_len, cfg.sub_tokens, cfg.sub_stride);
    for (std::size_t s = 0; s < base.size(); ++s) {
      emit(base[s], "#s" + std::to_string(s), 0, SubChunkRole::kBase);
    }
    if (cfg.two_phase_shift > 0) {
      for (std::size_t s = 0; s < base.size(); ++s) {
        const std::size_t begin = base[s].begin + cfg.two_phase_shift;
        if (begin >= chunk_len) continue;
        const std::size_t end = std::min(begin + cfg.sub_tokens, chunk_len);
        if (s > 0 && (end - begin) * 4 < cfg.sub_tokens) continue;
        emit({begin, end}, "#p" + std::to_string(s), cfg.two_phase_shift,
             SubChunkRole::kPhase);
      }
    }
    if (cfg.dense_stride > 0) {
      const auto dense = tile(chunk_len, cfg.sub_tokens, cfg.dense_stride);
      for (std::size_t s = 0; s < dense.size(); ++s) {
        emit(dense[s], "#d" + std::to_string(s), 0, SubChunkRole::kDense);
      }
    }
    out.chunks.push_back(std::move(chunk));
  }
  return out;
}

std::vector<TokenSeq> windows_of(const TokenSeq& tokens, std::size_t window_tokens) {
  if (window_tokens == 0) {
    throw Error(ErrorCode::kInvalidConfig, "window_tokens must be positive");
  }
  std::vector<TokenSeq> out;
  for (std::size_t begin = 0; begin < tokens.size(); begin += window_tokens) {
    out.push_back(slice(tokens, {begin, std::min(begin + window_tokens, tokens.size())}));
  }
  return out;
}

std::vector<Window> windows_of(const SubChunk& sub, std::size_t window_tokens) {
  auto slices = windows_of(sub.tokens, window_tokens);
  std::vector<Window> out;
  out.reserve(slices.size());
  for (std::size_t i = 0; i < slices.size(); ++i) {
    out.push_back({sub.sub_id, i, std::move(slices[i])});
  }
  return out;
}

namespace {

using nlohmann::json;

template <typename Fn>
void for_each_json_line(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      fn(json::parse(line));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kParse, path.string() + ":" + std::to_string(line_no) +
                                         ": " + e.what());
    }
  }
}

}  // namespace

std::vector<Document> read_documents(const std::filesystem::path& path) {
  std::vector<Document> docs;
  std::set<std::string> seen;
  for_each_json_line(path, [&](const json& j) {
    Document d{j.at("doc_id").get<std::string>(), j.at("text").get<std::string>(),
               j.value("lang", std::string{})};
    if (d.text.empty()) {
      throw Error(ErrorCode::kEmptyText, "document " + d.doc_id + " has empty text");
    }
    if (!seen.insert(d.doc_id).second) {
      throw Error(ErrorCode::kParse, "duplicate doc_id " + d.doc_id);
    }
    docs.push_back(std::move(d));
  });
  return docs;
}

std::vector<Query> read_queries(const std::filesystem::path& path) {
  std::vector<Query> queries;
  for_each_json_line(path, [&](const json& j) {
    queries.push_back({j.at("qid").get<std::string>(), j.at("text").get<std::string>(),
                       j.value("relevant_doc", std::string{})});
  });
  return queries;
}

void write_documents(const std::filesystem::path& path,
                     const std::vector<Document>& docs) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  for (const auto& d : docs) {
    out << json{{"doc_id", d.doc_id}, {"text", d.text}, {"lang", d.lang}}.dump() << '\n';
  }
}

void write_queries(const std::filesystem::path& path,
                   const std::vector<Query>& queries) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  for (const auto& q : queries) {
    out << json{{"qid", q.qid}, {"text", q.text}, {"relevant_doc", q.relevant_doc}}.dump()
        << '\n';
  }
}

}  // namespace qwb
