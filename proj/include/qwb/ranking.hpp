// Copyright 2026 The qwbench Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <string>
#include <vector>

namespace qwb {

struct Scored {
  std::string id;
  double score = 0.0;

  friend bool operator==(const Scored&, const Scored&) = default;
};

using Ranking = std::vector<Scored>;

/// The tie rule shared by every ranked list: descending score, then
/// ascending id.
inline bool ranks_before(const Scored& a, const Scored& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.id < b.id;
}

inline void sort_ranking(Ranking& r) { std::sort(r.begin(), r.end(), ranks_before); }

/// Sorts and keeps the first top_k entries (all when top_k == 0).
inline void truncate_ranking(Ranking& r, std::size_t top_k) {
  if (top_k == 0 || top_k >= r.size()) {
    sort_ranking(r);
    return;
  }
  std::partial_sort(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(top_k), r.end(),
                    ranks_before);
  r.resize(top_k);
}

inline std::vector<std::string> ids_of(const Ranking& r) {
  std::vector<std::string> out;
  out.reserve(r.size());
  for (const auto& s : r) out.push_back(s.id);
  return out;
}

}  // namespace qwb
