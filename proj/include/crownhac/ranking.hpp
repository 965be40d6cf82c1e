#pragma once

/// @file ranking.hpp
/// @brief Scale-normalised dispersion score of candidate clusters.
///
/// For the pixel set X of a candidate with centroid m, let r(x) = |x - m|
/// (Euclidean). The score is mean(r) / max(r), which lies in [0,1] and is
/// unchanged by translation and uniform scaling. The ratio sum(r) / max(r) is
/// reported alongside, since it is the quantity the published score tables
/// list.

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "crownhac/hac.hpp"
#include "crownhac/raster.hpp"

namespace crownhac {

struct DispersionStats {
  std::array<double, 2> centroid{0.0, 0.0};
  double sum_abs_dev = 0.0;
  double mean_abs_dev = 0.0;
  double max_abs_dev = 0.0;
  /// mean_abs_dev / max_abs_dev; 0 for a single pixel.
  double score = 0.0;
  /// sum_abs_dev / max_abs_dev; 0 for a single pixel.
  double ratio_table = 0.0;
  std::size_t pixel_count = 0;
};

/// a / b with the single-point convention 0 when b is 0.
inline double dispersion_ratio(double deviation, double max_deviation) {
  return max_deviation > 0.0 ? deviation / max_deviation : 0.0;
}

template <typename Point>
DispersionStats score_points(std::span<const Point> pts) {
  if (pts.empty()) throw std::invalid_argument("cannot score an empty pixel set");
  DispersionStats s;
  s.pixel_count = pts.size();
  const double n = static_cast<double>(pts.size());
  double sx = 0.0, sy = 0.0;
  for (const auto& p : pts) {
    sx += static_cast<double>(p.x);
    sy += static_cast<double>(p.y);
  }
  s.centroid = {sx / n, sy / n};
  for (const auto& p : pts) {
    const double r = std::hypot(static_cast<double>(p.x) - s.centroid[0], static_cast<double>(p.y) - s.centroid[1]);
    s.sum_abs_dev += r;
    s.max_abs_dev = std::max(s.max_abs_dev, r);
  }
  s.mean_abs_dev = s.sum_abs_dev / n;
  s.score = dispersion_ratio(s.mean_abs_dev, s.max_abs_dev);
  s.ratio_table = dispersion_ratio(s.sum_abs_dev, s.max_abs_dev);
  // Rounding can push mean marginally above max for near-degenerate sets.
  s.score = std::clamp(s.score, 0.0, 1.0);
  return s;
}

inline DispersionStats score_cluster(std::span<const PixelCoord> pixels) { return score_points(pixels); }

enum class ScoreKey { mean, sum };

inline std::string_view to_string(ScoreKey k) { return k == ScoreKey::mean ? "mean" : "sum"; }

inline ScoreKey parse_score_key(std::string_view s) {
  if (s == "mean") return ScoreKey::mean;
  if (s == "sum") return ScoreKey::sum;
  throw std::invalid_argument("unknown score key '" + std::string(s) + "'");
}

struct RankedCandidate {
  NodeId node = 0;
  DispersionStats stats;
  /// 1-based.
  std::size_t rank = 0;
};

/// Scores each terminal on P(h) and orders by ascending key, ties by node id.
inline std::vector<RankedCandidate> rank_candidates(const Hierarchy& hier, std::span<const Isol> isols,
                                                    std::span<const NodeId> terminals,
                                                    ScoreKey key = ScoreKey::mean) {
  std::vector<RankedCandidate> out;
  out.reserve(terminals.size());
  for (NodeId t : terminals) {
    const auto px = group_pixels(hier, isols, t);
    out.push_back({t, score_cluster(px), 0});
  }
  auto key_of = [key](const RankedCandidate& c) {
    return key == ScoreKey::mean ? c.stats.score : c.stats.ratio_table;
  };
  std::sort(out.begin(), out.end(), [&](const RankedCandidate& a, const RankedCandidate& b) {
    const double ka = key_of(a), kb = key_of(b);
    if (ka != kb) return ka < kb;
    return a.node < b.node;
  });
  for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = i + 1;
  return out;
}

}  // namespace crownhac
