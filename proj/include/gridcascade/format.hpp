#pragma once

#include <charconv>
#include <cmath>
#include <string>

namespace gridcascade {

/// Shortest decimal form that parses back to the same double.
inline std::string format_number(double value) {
  if (value == 0.0) return "0";  // folds -0
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (std::isnan(value)) return "nan";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

}  // namespace gridcascade
