#pragma once

#include <charconv>
#include <string>

namespace bgprtt {

/// Shortest round-trip representation; stable across runs, so CSV output is
/// byte-reproducible.
inline std::string format_double(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

}  // namespace bgprtt
