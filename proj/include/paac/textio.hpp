#pragma once

#include <charconv>
#include <cstdio>
#include <string>
#include <system_error>

#include "paac/common.hpp"

namespace paac {

// Shortest decimal that round-trips to the same 64-bit double; the basis
// for byte-stable checkpoints and CSV output.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw IoError("parse_double: bad float literal '" + s + "'");
  }
  return v;
}

inline std::uint64_t parse_u64(const std::string& s) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw IoError("parse_u64: bad integer literal '" + s + "'");
  }
  return v;
}

}  // namespace paac
