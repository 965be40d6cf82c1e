#pragma once

#include <charconv>
#include <cmath>
#include <string>
#include <system_error>

namespace crownhac {

/// Shortest round-trip decimal form; stable across runs for byte-identical CSVs.
inline std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";  // folds -0
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) return std::to_string(v);
  return std::string(buf, end);
}

}  // namespace crownhac
