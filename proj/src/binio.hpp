// Copyright 2026 The qwbench Authors
// SPDX-License-Identifier: Apache-2.0

// Little binary stream helpers shared by the on-disk formats. Values are
// written in host byte order (all supported targets are little-endian).

#pragma once

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <type_traits>
#include <vector>

#include "qwb/error.hpp"

namespace qwb::binio {

template <typename T>
void put(std::ostream& out, const T& value) {
  static_assert(std::is_trivially_copyable_v<T>);
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  static_assert(std::is_trivially_copyable_v<T>);
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw Error(ErrorCode::kParse, "truncated binary file");
  return value;
}

inline void put_string(std::ostream& out, const std::string& s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string get_string(std::istream& in) {
  const auto n = get<std::uint32_t>(in);
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (!in) throw Error(ErrorCode::kParse, "truncated binary file");
  return s;
}

template <typename T>
void put_array(std::ostream& out, const T* data, std::size_t n) {
  out.write(reinterpret_cast<const char*>(data),
            static_cast<std::streamsize>(n * sizeof(T)));
}

template <typename T>
void get_array(std::istream& in, T* data, std::size_t n) {
  in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(n * sizeof(T)));
  if (!in) throw Error(ErrorCode::kParse, "truncated binary file");
}

inline void expect_magic(std::istream& in, const char (&magic)[9]) {
  char buf[8];
  in.read(buf, 8);
  if (!in || std::memcmp(buf, magic, 8) != 0) {
    throw Error(ErrorCode::kParse, std::string("bad magic, expected ") + magic);
  }
}

inline void put_magic(std::ostream& out, const char (&magic)[9]) { out.write(magic, 8); }

}  // namespace qwb::binio
