#pragma once

/// @file synth.hpp
/// @brief Synthetic labelled scenes with known groupings.
///
/// Geometry is integer-only and randomness comes from std::mt19937_64, whose
/// output sequence is fixed by the standard; bounded draws use rejection
/// sampling rather than std::uniform_int_distribution, so a seed yields the
/// same raster everywhere.

#include <algorithm>
#include <array>
#include <cstdint>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "crownhac/raster.hpp"

namespace crownhac {

struct SynthScene {
  LabeledRaster raster{1, 1};
  /// Partition of the ISOL ids; each group sorted.
  std::vector<std::vector<IsolId>> truth_groups;
  std::uint64_t seed = 0;
};

namespace detail {

class SynthRng {
 public:
  explicit SynthRng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform integer in [lo, hi].
  std::int64_t uniform(std::int64_t lo, std::int64_t hi) {
    if (hi < lo) throw std::invalid_argument("empty range");
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<std::int64_t>(engine_());
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % span;
    std::uint64_t v;
    do {
      v = engine_();
    } while (v >= limit);
    return lo + static_cast<std::int64_t>(v % span);
  }

 private:
  std::mt19937_64 engine_;
};

/// Filled axis-aligned rectangle or plus shape, given as pixel offsets from
/// an anchor.
struct BlobShape {
  std::vector<PixelCoord> cells;

  static BlobShape rect(int w, int h) {
    BlobShape s;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) s.cells.push_back({x - w / 2, y - h / 2});
    return s;
  }

  /// Plus with arms of length `arm` beyond a central square of side `thick`.
  static BlobShape plus(int arm, int thick) {
    BlobShape s;
    const int half = thick / 2;
    const int reach = half + arm;
    for (int y = -reach; y <= reach; ++y)
      for (int x = -reach; x <= reach; ++x)
        if ((x >= -half && x <= half - 1 + thick % 2) || (y >= -half && y <= half - 1 + thick % 2))
          s.cells.push_back({x, y});
    return s;
  }
};

inline bool fits(const LabeledRaster& r, const BlobShape& b, PixelCoord at, int clearance) {
  for (const auto& c : b.cells) {
    for (int dy = -clearance; dy <= clearance; ++dy) {
      for (int dx = -clearance; dx <= clearance; ++dx) {
        const std::int64_t x = at.x + c.x + dx, y = at.y + c.y + dy;
        if (dx == 0 && dy == 0 && !r.contains(x, y)) return false;
        if (r.contains(x, y) && r.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) != 0) return false;
      }
    }
  }
  return true;
}

inline void stamp(LabeledRaster& r, const BlobShape& b, PixelCoord at, Label label) {
  for (const auto& c : b.cells) r.set({at.x + c.x, at.y + c.y}, label);
}

}  // namespace detail

struct RingGeometry {
  /// Width of each slice of the crown disc; 0 picks size / 64 (at least 1).
  int slice_width = 0;
  /// Outlier bars: longest length along the horizontal axis, and thickness.
  int outlier_length = 12;
  int outlier_thickness = 5;
};

/// A crown-like disc cut into k parallel vertical slices by `gap`-wide
/// valleys, ids 1..k from left to right rotated by a seed-chosen offset. Each
/// slice borders only its two neighbours, and the valleys lengthen towards
/// the middle of the disc.
///
/// Outliers are thick bars on either side of the disc, within its rows, so
/// each is reached from the crown by a handful of straight rays: the first
/// two sit east and west at the same run, the next two behind them on the
/// other side of the disc's centre row, staggered far enough that no ray
/// joins two bars.
inline SynthScene generate_ring(std::uint64_t seed, int k, int gap, int outliers, int size,
                                RingGeometry geo = {}) {
  if (k < 3) throw std::invalid_argument("ring needs at least 3 ISOLs");
  if (gap < 1) throw std::invalid_argument("gap must be at least 1");
  if (outliers < 0 || outliers > 4) throw std::invalid_argument("outliers must be in 0..4");
  if (geo.slice_width < 0 || geo.outlier_length < 2 || geo.outlier_thickness < 1)
    throw std::invalid_argument("bad ring geometry");

  detail::SynthRng rng(seed);
  const int width = geo.slice_width > 0 ? geo.slice_width : std::max(1, size / 64);
  const int pitch = width + gap;
  const int extent = k * width + (k - 1) * gap;
  const int c = size / 2;
  const int origin = c - extent / 2;
  if (origin < 2 || origin + extent > size - 2) throw std::invalid_argument("ring does not fit");

  LabeledRaster r(static_cast<std::size_t>(size), static_cast<std::size_t>(size));
  const int rotation = static_cast<int>(rng.uniform(0, k - 1));
  // Doubled coordinates keep the disc test exact and mirror-symmetric.
  const long long cx2 = 2LL * origin + extent, cy2 = 2LL * c;
  const long long r2 = static_cast<long long>(extent) * extent;
  for (int i = 0; i < k; ++i) {
    const auto label = static_cast<Label>((i - rotation + k) % k + 1);
    for (int x = origin + i * pitch; x < origin + i * pitch + width; ++x) {
      for (int y = c - extent / 2 - 1; y <= c + extent / 2 + 1; ++y) {
        const long long dx = 2LL * x + 1 - cx2, dy = 2LL * y + 1 - cy2;
        if (dx * dx + dy * dy <= r2) r.set({x, y}, label);
      }
    }
  }

  SynthScene scene;
  scene.seed = seed;
  std::vector<IsolId> ring(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) ring[static_cast<std::size_t>(i)] = static_cast<IsolId>(i + 1);
  scene.truth_groups.push_back(ring);

  const int t = geo.outlier_thickness;
  // Rows of the near and far bars; the far ones start beyond the near ones by
  // more than the row separation so that no diagonal ray connects them.
  const int near_row = c - 2 - t, far_row = c + 2;
  const int rows_spanned = far_row + t - near_row;
  // The nearest bar pixel must lie outside the band swept by the disc's
  // diagonal rays: run + radius - (rows from the centre) > radius * sqrt(2).
  // Squared and doubled: (2 * (radius + run - rows)) ^ 2 > 2 * extent ^ 2.
  int min_run = 1;
  for (long long reach = 2LL * (extent / 2 + min_run - (c - near_row)); reach * reach <= 2LL * extent * extent;
       reach += 2)
    ++min_run;
  const int avail = c - extent / 2 - 3;
  int len = geo.outlier_length;
  if (outliers > 2) len = std::min(len, (avail - min_run - rows_spanned - 6) / 2);
  else len = std::min(len, avail - min_run);
  if (outliers > 0 && len < 2) throw std::invalid_argument("outliers do not fit");
  const int stagger = len + rows_spanned + 6;
  const int run = avail - len - (outliers > 2 ? stagger : 0);
  if (outliers > 0 && run < min_run) throw std::invalid_argument("outliers do not fit");
  for (int o = 0; o < outliers; ++o) {
    const bool east = o % 2 == 0;
    const bool far = o >= 2;
    const int jitter = static_cast<int>(rng.uniform(0, std::min(2, run - min_run)));
    const int at = run + (far ? stagger : 0) - jitter;
    // Rows only shift towards the centre row, keeping bars level with the outer slices.
    const int shift = static_cast<int>(rng.uniform(0, 1));
    const int row = far ? far_row - shift : near_row + shift;
    const int x0 = east ? origin + extent + at : origin - at - len;
    const auto id = static_cast<Label>(k + o + 1);
    for (int y = row; y < row + t; ++y) {
      for (int x = x0; x < x0 + len; ++x) {
        if (!r.contains(x, y)) throw std::invalid_argument("outliers do not fit");
        r.set({x, y}, id);
      }
    }
    scene.truth_groups.push_back({static_cast<IsolId>(id)});
  }
  scene.raster = std::move(r);
  return scene;
}

/// n non-overlapping random rectangles and plus shapes, all singleton truth groups.
inline SynthScene generate_random(std::uint64_t seed, int n, int size) {
  if (n < 1) throw std::invalid_argument("need at least one ISOL");
  if (size < 3) throw std::invalid_argument("raster too small");
  detail::SynthRng rng(seed);
  LabeledRaster r(static_cast<std::size_t>(size), static_cast<std::size_t>(size));
  SynthScene scene;
  scene.seed = seed;
  const int max_side = std::max(2, size / 7);
  const int max_attempts = 1000 * n;
  int attempts = 0;
  for (int i = 0; i < n; ++i) {
    bool placed = false;
    while (!placed) {
      if (++attempts > max_attempts) throw std::invalid_argument("random scene does not fit");
      detail::BlobShape shape = rng.uniform(0, 3) == 0
                                    ? detail::BlobShape::plus(static_cast<int>(rng.uniform(1, std::max(1, max_side / 2))),
                                                              static_cast<int>(rng.uniform(1, 2)))
                                    : detail::BlobShape::rect(static_cast<int>(rng.uniform(1, max_side)),
                                                              static_cast<int>(rng.uniform(1, max_side)));
      const PixelCoord at{static_cast<std::int32_t>(rng.uniform(0, size - 1)),
                          static_cast<std::int32_t>(rng.uniform(0, size - 1))};
      if (!detail::fits(r, shape, at, 0)) continue;
      detail::stamp(r, shape, at, static_cast<Label>(i + 1));
      scene.truth_groups.push_back({static_cast<IsolId>(i + 1)});
      placed = true;
    }
  }
  scene.raster = std::move(r);
  return scene;
}

}  // namespace crownhac
