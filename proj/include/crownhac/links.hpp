#pragma once

/// @file links.hpp
/// @brief Connective links between ISOLs and the connective distance.
///
/// From every edge pixel of every ISOL a ray is walked in each of the eight
/// compass directions across label-0 pixels. The ray yields a link when the
/// first non-zero pixel it meets belongs to a different ISOL. The distance
/// between two ISOLs (or two groups of ISOLs) is the size of the union of the
/// interstitial pixels over all links joining them; pairs with no link are
/// infinitely far apart.

#include <algorithm>
#include <array>
#include <compare>
#include <cstdint>
#include <iterator>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string_view>
#include <utility>
#include <vector>

#include "crownhac/raster.hpp"

namespace crownhac {

/// Extended non-negative integer; infinite means "no connective link".
class Distance {
 public:
  constexpr Distance() = default;
  constexpr explicit Distance(std::uint64_t v) : value_(v) {}
  static constexpr Distance infinite() { return Distance(kInf); }

  constexpr bool is_finite() const { return value_ != kInf; }
  constexpr std::uint64_t value() const {
    if (!is_finite()) throw std::logic_error("value() of infinite distance");
    return value_;
  }

  friend constexpr auto operator<=>(const Distance&, const Distance&) = default;

  friend std::ostream& operator<<(std::ostream& os, const Distance& d) {
    if (d.is_finite()) return os << d.value_;
    return os << "inf";
  }

 private:
  static constexpr std::uint64_t kInf = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t value_ = 0;
};

enum class Direction : std::uint8_t { N, NE, E, SE, S, SW, W, NW };

inline constexpr std::array<Direction, 8> kAllDirections = {
    Direction::N, Direction::NE, Direction::E, Direction::SE,
    Direction::S, Direction::SW, Direction::W, Direction::NW};

/// Unit step of a direction; y grows downward.
inline constexpr std::pair<int, int> step_of(Direction d) {
  constexpr std::array<std::pair<int, int>, 8> steps = {
      {{0, -1}, {1, -1}, {1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}}};
  return steps[static_cast<std::size_t>(d)];
}

inline constexpr std::string_view to_string(Direction d) {
  constexpr std::array<std::string_view, 8> names = {"N", "NE", "E", "SE", "S", "SW", "W", "NW"};
  return names[static_cast<std::size_t>(d)];
}

struct ConnectiveLink {
  IsolId origin_isol = 0;
  IsolId target_isol = 0;
  Direction direction = Direction::N;
  PixelCoord origin_pixel;
  /// Label-0 pixels crossed, in walk order. Empty when the ISOLs touch.
  std::vector<PixelCoord> interstitial_pixels;

  std::size_t length() const { return interstitial_pixels.size(); }
};

/// Unordered ISOL pair, normalised so that first < second.
struct IsolPair {
  IsolId first = 0;
  IsolId second = 0;

  static IsolPair of(IsolId a, IsolId b) { return a < b ? IsolPair{a, b} : IsolPair{b, a}; }
  friend auto operator<=>(const IsolPair&, const IsolPair&) = default;
};

/// L(A,B) for one unordered pair, with the cached pixel union.
struct PairLinks {
  std::vector<ConnectiveLink> links;
  /// Sorted, unique linear pixel indices of all interstitial pixels.
  std::vector<PixelIndex> pixel_union;
  /// Sum of link lengths over the link multiset.
  std::uint64_t total_length = 0;
};

namespace detail {

inline void sorted_union_into(std::vector<PixelIndex>& acc, std::span<const PixelIndex> other) {
  if (other.empty()) return;
  std::vector<PixelIndex> merged;
  merged.reserve(acc.size() + other.size());
  std::set_union(acc.begin(), acc.end(), other.begin(), other.end(), std::back_inserter(merged));
  acc.swap(merged);
}

}  // namespace detail

class LinkStore {
 public:
  LinkStore() = default;
  explicit LinkStore(std::size_t raster_width) : width_(raster_width) {}

  /// Adds a link under the key of its endpoint pair.
  void add(ConnectiveLink link) {
    const IsolPair key = IsolPair::of(link.origin_isol, link.target_isol);
    append(std::move(link));
    normalize(pairs_[key].pixel_union);
  }

  /// Bulk insertion: append() any number of links, then finalize() once.
  void append(ConnectiveLink link) {
    if (link.origin_isol == link.target_isol) throw std::invalid_argument("self link");
    if (width_ == 0) throw std::logic_error("LinkStore needs the raster width");
    auto& entry = pairs_[IsolPair::of(link.origin_isol, link.target_isol)];
    for (const PixelCoord& p : link.interstitial_pixels)
      entry.pixel_union.push_back(static_cast<PixelIndex>(static_cast<std::size_t>(p.y) * width_ +
                                                          static_cast<std::size_t>(p.x)));
    entry.total_length += link.length();
    entry.links.push_back(std::move(link));
  }

  void finalize() {
    for (auto& [key, entry] : pairs_) normalize(entry.pixel_union);
  }

  const PairLinks* find(IsolId a, IsolId b) const {
    auto it = pairs_.find(IsolPair::of(a, b));
    return it == pairs_.end() ? nullptr : &it->second;
  }

  std::span<const ConnectiveLink> links(IsolId a, IsolId b) const {
    const PairLinks* p = find(a, b);
    return p ? std::span<const ConnectiveLink>(p->links) : std::span<const ConnectiveLink>();
  }

  const std::map<IsolPair, PairLinks>& pairs() const { return pairs_; }
  std::size_t width() const { return width_; }

  std::size_t link_count() const {
    std::size_t n = 0;
    for (const auto& [k, v] : pairs_) n += v.links.size();
    return n;
  }

 private:
  static void normalize(std::vector<PixelIndex>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }

  std::size_t width_ = 0;
  std::map<IsolPair, PairLinks> pairs_;
};

struct RayOptions {
  /// Rays longer than this many interstitial pixels are abandoned. Unlimited by default.
  std::optional<std::size_t> max_ray;
};

/// Walks every ray from every edge pixel of every ISOL.
///
/// A ray stops at the raster border (no link), at a pixel of its own ISOL (no
/// link) or at the first pixel of another ISOL (link). A third ISOL in the way
/// therefore occludes the target. Iteration order is fixed: ISOLs by id, edge
/// pixels row-major, directions clockwise from north.
inline LinkStore cast_rays(const LabeledRaster& raster, std::span<const Isol> isols, RayOptions opts = {}) {
  LinkStore store(raster.width());
  for (const Isol& isol : isols) {
    for (const PixelCoord& origin : isol.edge_pixels) {
      for (Direction dir : kAllDirections) {
        const auto [dx, dy] = step_of(dir);
        std::vector<PixelCoord> path;
        std::int64_t x = origin.x + dx;
        std::int64_t y = origin.y + dy;
        while (raster.contains(x, y)) {
          const PixelCoord p{static_cast<std::int32_t>(x), static_cast<std::int32_t>(y)};
          const Label v = raster.at(p);
          if (v != 0) {
            if (v != isol.id) {
              ConnectiveLink link{isol.id, v, dir, origin, std::move(path)};
              store.append(std::move(link));
            }
            break;
          }
          if (opts.max_ray && path.size() >= *opts.max_ray) break;
          path.push_back(p);
          x += dx;
          y += dy;
        }
      }
    }
  }
  store.finalize();
  return store;
}

/// |∪ L(a,b)|, or infinite when a and b share no link.
inline Distance pair_distance(const LinkStore& store, IsolId a, IsolId b) {
  const PairLinks* p = store.find(a, b);
  if (!p || p->links.empty()) return Distance::infinite();
  return Distance(p->pixel_union.size());
}

/// Pixel union of every link between a member of group_a and a member of
/// group_b. Returns nullopt when no cross-group link exists.
inline std::optional<std::vector<PixelIndex>> group_link_pixels(const LinkStore& store,
                                                               std::span<const IsolId> group_a,
                                                               std::span<const IsolId> group_b) {
  if (group_a.empty() || group_b.empty()) throw std::invalid_argument("groups must be non-empty");
  for (IsolId a : group_a)
    if (std::find(group_b.begin(), group_b.end(), a) != group_b.end())
      throw std::invalid_argument("groups must be disjoint");

  bool any = false;
  std::vector<PixelIndex> acc;
  for (IsolId a : group_a) {
    for (IsolId b : group_b) {
      const PairLinks* p = store.find(a, b);
      if (!p || p->links.empty()) continue;
      any = true;
      detail::sorted_union_into(acc, p->pixel_union);
    }
  }
  if (!any) return std::nullopt;
  return acc;
}

/// Connective distance between two disjoint, non-empty groups of ISOLs.
inline Distance group_distance(const LinkStore& store, std::span<const IsolId> group_a,
                               std::span<const IsolId> group_b) {
  auto px = group_link_pixels(store, group_a, group_b);
  return px ? Distance(px->size()) : Distance::infinite();
}

/// Debug dump: one row per stored link.
inline void write_links_csv(std::ostream& out, const LinkStore& store) {
  out << "origin_isol,target_isol,direction,origin_x,origin_y,length\n";
  for (const auto& [key, entry] : store.pairs()) {
    for (const auto& l : entry.links) {
      out << l.origin_isol << ',' << l.target_isol << ',' << to_string(l.direction) << ','
          << l.origin_pixel.x << ',' << l.origin_pixel.y << ',' << l.length() << '\n';
    }
  }
}

}  // namespace crownhac
