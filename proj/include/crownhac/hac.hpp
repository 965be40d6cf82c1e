#pragma once

/// @file hac.hpp
/// @brief Agglomerative clustering under the group connective distance and
/// the resulting agglomeration hierarchy.
///
/// Node ids are dense: singletons take 0..M-1 in ISOL id order, and the node
/// formed at merge iteration i (1-based) takes id M-1+i. Every node has zero or
/// two ancestors and at most one successor. Scenes whose ISOLs are not all
/// link-connected yield a forest.

#include <algorithm>
#include <array>
#include <cstdint>
#include <iterator>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "crownhac/links.hpp"
#include "crownhac/raster.hpp"

namespace crownhac {

using NodeId = std::uint32_t;

struct HierarchyNode {
  NodeId id = 0;
  /// Member ISOL ids, sorted.
  std::vector<IsolId> members;
  /// The two merged nodes, absent for singletons.
  std::optional<std::array<NodeId, 2>> ancestors;
  std::optional<NodeId> successor;
  /// 1-based merge iteration i(H); absent for singletons.
  std::optional<std::uint32_t> merge_iteration;
  /// Group distance realised by the merge; absent for singletons.
  std::optional<Distance> merge_distance;

  bool is_singleton() const { return !ancestors.has_value(); }
};

class Hierarchy {
 public:
  Hierarchy() = default;

  /// Starts a hierarchy of singleton nodes, one per ISOL id (ids must be unique).
  explicit Hierarchy(std::vector<IsolId> isol_ids) {
    std::sort(isol_ids.begin(), isol_ids.end());
    if (std::adjacent_find(isol_ids.begin(), isol_ids.end()) != isol_ids.end())
      throw std::invalid_argument("duplicate ISOL id");
    nodes_.reserve(isol_ids.empty() ? 0 : 2 * isol_ids.size() - 1);
    for (IsolId id : isol_ids) {
      HierarchyNode n;
      n.id = static_cast<NodeId>(nodes_.size());
      n.members = {id};
      nodes_.push_back(std::move(n));
      singleton_ids_.emplace(id, nodes_.back().id);
    }
    isol_count_ = isol_ids.size();
  }

  /// Records the merge of two current roots and returns the new node.
  NodeId merge(NodeId a, NodeId b, Distance distance) {
    check(a);
    check(b);
    if (a == b) throw std::invalid_argument("cannot merge a node with itself");
    if (nodes_[a].successor || nodes_[b].successor)
      throw std::invalid_argument("only root nodes can be merged");

    HierarchyNode n;
    n.id = static_cast<NodeId>(nodes_.size());
    // Keep the ancestor holding the smaller ISOL id first.
    if (nodes_[b].members.front() < nodes_[a].members.front()) std::swap(a, b);
    n.ancestors = std::array<NodeId, 2>{a, b};
    std::merge(nodes_[a].members.begin(), nodes_[a].members.end(), nodes_[b].members.begin(),
               nodes_[b].members.end(), std::back_inserter(n.members));
    n.merge_iteration = static_cast<std::uint32_t>(merge_count() + 1);
    n.merge_distance = distance;
    nodes_[a].successor = n.id;
    nodes_[b].successor = n.id;
    nodes_.push_back(std::move(n));
    return nodes_.back().id;
  }

  const HierarchyNode& node(NodeId h) const {
    check(h);
    return nodes_[h];
  }
  std::span<const HierarchyNode> nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  std::size_t isol_count() const { return isol_count_; }
  std::size_t merge_count() const { return nodes_.size() - isol_count_; }

  NodeId singleton(IsolId isol) const {
    auto it = singleton_ids_.find(isol);
    if (it == singleton_ids_.end()) throw std::out_of_range("unknown ISOL id " + std::to_string(isol));
    return it->second;
  }

  std::vector<NodeId> roots() const {
    std::vector<NodeId> out;
    for (const auto& n : nodes_)
      if (!n.successor) out.push_back(n.id);
    return out;
  }

  /// k-fold successor h^k(h); k = 0 gives h itself.
  std::optional<NodeId> successor(NodeId h, std::size_t k = 1) const {
    check(h);
    std::optional<NodeId> cur = h;
    for (std::size_t i = 0; i < k && cur; ++i) cur = nodes_[*cur].successor;
    return cur;
  }

  /// The linear path [h0, h(h0), h(h(h0)), ...] ending at a root.
  std::vector<NodeId> path_from(NodeId h0) const {
    check(h0);
    std::vector<NodeId> path{h0};
    while (auto next = nodes_[path.back()].successor) path.push_back(*next);
    return path;
  }

  /// h together with all of its transitive ancestors, sorted.
  std::vector<NodeId> ancestors_all(NodeId h) const {
    check(h);
    std::vector<NodeId> out;
    std::vector<NodeId> stack{h};
    while (!stack.empty()) {
      NodeId cur = stack.back();
      stack.pop_back();
      out.push_back(cur);
      if (const auto& anc = nodes_[cur].ancestors) {
        stack.push_back((*anc)[0]);
        stack.push_back((*anc)[1]);
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Lowest node containing both ISOLs, or nullopt when they lie in different trees.
  std::optional<NodeId> lowest_common(IsolId a, IsolId b) const {
    // Merge ids grow along every path, so the first shared node is the lowest.
    auto pa = path_from(singleton(a));
    auto pb = path_from(singleton(b));
    std::size_t i = 0, j = 0;
    while (i < pa.size() && j < pb.size()) {
      if (pa[i] == pb[j]) return pa[i];
      if (pa[i] < pb[j]) ++i; else ++j;
    }
    return std::nullopt;
  }

 private:
  void check(NodeId h) const {
    if (h >= nodes_.size()) throw std::out_of_range("unknown node " + std::to_string(h));
  }

  std::vector<HierarchyNode> nodes_;
  std::map<IsolId, NodeId> singleton_ids_;
  std::size_t isol_count_ = 0;
};

namespace detail {

struct ActivePair {
  std::vector<PixelIndex> pixels;
};

}  // namespace detail

/// Runs the merge loop: repeatedly unite the closest pair of active groups
/// until no pair has a finite distance.
///
/// Ties at the minimal distance go to the pair whose smaller minimum member id
/// is smallest, then whose larger minimum member id is smallest. Distances
/// between a new group and every other group are the size of the union of the
/// cached cross-link pixel sets; no linkage recurrence is involved.
inline Hierarchy agglomerate(std::span<const Isol> isols, const LinkStore& store) {
  if (isols.empty()) throw std::invalid_argument("agglomerate needs at least one ISOL");
  std::vector<IsolId> ids;
  ids.reserve(isols.size());
  for (const auto& i : isols) ids.push_back(i.id);
  Hierarchy hier(ids);

  using Key = std::pair<NodeId, NodeId>;
  auto key_of = [](NodeId a, NodeId b) { return a < b ? Key{a, b} : Key{b, a}; };

  std::map<Key, detail::ActivePair> cache;
  std::vector<std::set<NodeId>> neighbours(2 * ids.size() - 1);

  for (const auto& [pair, entry] : store.pairs()) {
    if (entry.links.empty()) continue;
    const NodeId a = hier.singleton(pair.first);
    const NodeId b = hier.singleton(pair.second);
    cache[key_of(a, b)].pixels = entry.pixel_union;
    neighbours[a].insert(b);
    neighbours[b].insert(a);
  }

  while (!cache.empty()) {
    auto best = cache.end();
    std::tuple<std::size_t, IsolId, IsolId> best_rank{};
    for (auto it = cache.begin(); it != cache.end(); ++it) {
      const IsolId ma = hier.node(it->first.first).members.front();
      const IsolId mb = hier.node(it->first.second).members.front();
      std::tuple<std::size_t, IsolId, IsolId> rank{it->second.pixels.size(), std::min(ma, mb), std::max(ma, mb)};
      if (best == cache.end() || rank < best_rank) {
        best = it;
        best_rank = rank;
      }
    }

    const auto [a, b] = best->first;
    const Distance d(best->second.pixels.size());
    cache.erase(best);
    neighbours[a].erase(b);
    neighbours[b].erase(a);
    const NodeId c = hier.merge(a, b, d);

    std::map<NodeId, detail::ActivePair> merged;
    for (NodeId old : {a, b}) {
      for (NodeId x : neighbours[old]) {
        auto it = cache.find(key_of(old, x));
        auto& target = merged[x];
        if (target.pixels.empty()) {
          target.pixels = std::move(it->second.pixels);
        } else {
          detail::sorted_union_into(target.pixels, it->second.pixels);
        }
        cache.erase(it);
        neighbours[x].erase(old);
      }
      neighbours[old].clear();
    }
    for (auto& [x, entry] : merged) {
      cache.emplace(key_of(c, x), std::move(entry));
      neighbours[c].insert(x);
      neighbours[x].insert(c);
    }
  }
  return hier;
}

/// P(h): union of the pixel sets of the member ISOLs of h, sorted row-major.
inline std::vector<PixelCoord> group_pixels(const Hierarchy& hier, std::span<const Isol> isols, NodeId h) {
  std::vector<PixelCoord> out;
  for (IsolId m : hier.node(h).members) {
    const Isol* isol = find_isol(isols, m);
    if (!isol) throw std::invalid_argument("ISOL " + std::to_string(m) + " missing from list");
    out.insert(out.end(), isol->pixels.begin(), isol->pixels.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace crownhac
