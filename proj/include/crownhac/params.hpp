#pragma once

/// @file params.hpp
/// @brief Geometric parameters of each hierarchy node and the scalar streams
/// derived from them.
///
/// For a merge node formed from groups A and B:
///   a_merge      |union of pixels of links between A and B|
///   l_hat        mean length over the A-B link multiset
///   lw_ratio     l_hat^2 / a_merge (0 when a_merge is 0)
///   n_pix        sum of member ISOL pixel counts
///   n_edge       sum of member ISOL edge pixel counts
///   a_cumulative |union of link pixels of this merge and every ancestral merge|
/// Singletons only carry n_pix and n_edge.

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "crownhac/format.hpp"
#include "crownhac/hac.hpp"
#include "crownhac/links.hpp"
#include "crownhac/raster.hpp"

namespace crownhac {

struct NodeParams {
  std::optional<std::uint64_t> a_merge;
  std::optional<double> l_hat;
  std::optional<double> lw_ratio;
  std::uint64_t n_pix = 0;
  std::uint64_t n_edge = 0;
  std::optional<std::uint64_t> a_cumulative;
  /// |L(A,B)| as a multiset; 0 for singletons.
  std::uint64_t link_count = 0;
};

/// Indexed by NodeId.
using ParamTable = std::vector<NodeParams>;

inline ParamTable compute_params(const Hierarchy& hier, std::span<const Isol> isols, const LinkStore& store) {
  ParamTable table(hier.size());
  std::vector<std::vector<PixelIndex>> merge_pixels(hier.size());
  std::vector<std::uint64_t> length_sum(hier.size(), 0);

  // Each linked ISOL pair contributes its links to exactly one merge: the
  // lowest node holding both ends.
  for (const auto& [pair, entry] : store.pairs()) {
    if (entry.links.empty()) continue;
    auto lca = hier.lowest_common(pair.first, pair.second);
    if (!lca) continue;
    detail::sorted_union_into(merge_pixels[*lca], entry.pixel_union);
    table[*lca].link_count += entry.links.size();
    length_sum[*lca] += entry.total_length;
  }

  std::vector<std::vector<PixelIndex>> cumulative(hier.size());
  for (const HierarchyNode& n : hier.nodes()) {
    NodeParams& p = table[n.id];
    if (n.is_singleton()) {
      const Isol* isol = find_isol(isols, n.members.front());
      if (!isol) throw std::invalid_argument("ISOL " + std::to_string(n.members.front()) + " missing from list");
      p.n_pix = isol->pixels.size();
      p.n_edge = isol->edge_pixels.size();
      continue;
    }
    const auto [a, b] = *n.ancestors;
    p.n_pix = table[a].n_pix + table[b].n_pix;
    p.n_edge = table[a].n_edge + table[b].n_edge;

    const auto area = merge_pixels[n.id].size();
    p.a_merge = area;
    p.l_hat = p.link_count ? static_cast<double>(length_sum[n.id]) / static_cast<double>(p.link_count) : 0.0;
    p.lw_ratio = area ? (*p.l_hat * *p.l_hat) / static_cast<double>(area) : 0.0;

    // Ancestors are built before n and have no other successor, so their
    // cumulative sets can be consumed.
    auto& cum = cumulative[n.id];
    cum = std::move(merge_pixels[n.id]);
    detail::sorted_union_into(cum, cumulative[a]);
    detail::sorted_union_into(cum, cumulative[b]);
    std::vector<PixelIndex>().swap(cumulative[a]);
    std::vector<PixelIndex>().swap(cumulative[b]);
    p.a_cumulative = cum.size();
  }
  return table;
}

enum class ParamField { a_merge, l_hat, lw_ratio, n_pix, n_edge, a_cumulative };

inline std::string_view to_string(ParamField f) {
  switch (f) {
    case ParamField::a_merge: return "a_merge";
    case ParamField::l_hat: return "l_hat";
    case ParamField::lw_ratio: return "lw_ratio";
    case ParamField::n_pix: return "n_pix";
    case ParamField::n_edge: return "n_edge";
    case ParamField::a_cumulative: return "a_cumulative";
  }
  return "?";
}

inline std::optional<ParamField> parse_field(std::string_view s) {
  for (ParamField f : {ParamField::a_merge, ParamField::l_hat, ParamField::lw_ratio, ParamField::n_pix,
                       ParamField::n_edge, ParamField::a_cumulative})
    if (to_string(f) == s) return f;
  return std::nullopt;
}

/// A single field, or a ratio of two fields. "lw_over_acum" is the ratio
/// lw_ratio / a_cumulative; "X/Y" spells any other ratio.
struct ParameterChoice {
  ParamField numerator = ParamField::a_merge;
  std::optional<ParamField> denominator;

  static ParameterChoice a_merge() { return {ParamField::a_merge, std::nullopt}; }
  static ParameterChoice lw_over_acum() { return {ParamField::lw_ratio, ParamField::a_cumulative}; }

  static ParameterChoice parse(std::string_view s) {
    if (s == "lw_over_acum") return lw_over_acum();
    if (auto slash = s.find('/'); slash != std::string_view::npos) {
      auto num = parse_field(s.substr(0, slash));
      auto den = parse_field(s.substr(slash + 1));
      if (num && den) return {*num, *den};
    } else if (auto f = parse_field(s)) {
      return {*f, std::nullopt};
    }
    throw std::invalid_argument("unknown parameter choice '" + std::string(s) + "'");
  }

  std::string name() const {
    if (*this == lw_over_acum()) return "lw_over_acum";
    std::string out(to_string(numerator));
    if (denominator) out += "/" + std::string(to_string(*denominator));
    return out;
  }

  friend bool operator==(const ParameterChoice&, const ParameterChoice&) = default;
};

/// One value per node; singletons carry nullopt.
using NodeStream = std::vector<std::optional<double>>;

namespace detail {

inline double field_value(const NodeParams& p, ParamField f) {
  switch (f) {
    case ParamField::a_merge: return static_cast<double>(p.a_merge.value_or(0));
    case ParamField::l_hat: return p.l_hat.value_or(0.0);
    case ParamField::lw_ratio: return p.lw_ratio.value_or(0.0);
    case ParamField::n_pix: return static_cast<double>(p.n_pix);
    case ParamField::n_edge: return static_cast<double>(p.n_edge);
    case ParamField::a_cumulative: return static_cast<double>(p.a_cumulative.value_or(0));
  }
  return 0.0;
}

}  // namespace detail

/// Scalar per merge node. A zero denominator yields 0.
inline NodeStream parameter_stream(const Hierarchy& hier, const ParamTable& params, const ParameterChoice& choice) {
  if (params.size() != hier.size()) throw std::invalid_argument("parameter table does not match hierarchy");
  NodeStream out(hier.size());
  for (const HierarchyNode& n : hier.nodes()) {
    if (n.is_singleton()) continue;
    const double num = detail::field_value(params[n.id], choice.numerator);
    if (!choice.denominator) {
      out[n.id] = num;
      continue;
    }
    const double den = detail::field_value(params[n.id], *choice.denominator);
    out[n.id] = den == 0.0 ? 0.0 : num / den;
  }
  return out;
}

inline void write_params_csv(std::ostream& out, const Hierarchy& hier, const ParamTable& params) {
  out << "node_id,merge_iteration,a_merge,l_hat,lw_ratio,n_pix,n_edge,a_cumulative\n";
  for (const HierarchyNode& n : hier.nodes()) {
    const NodeParams& p = params[n.id];
    out << n.id << ',';
    if (n.merge_iteration) out << *n.merge_iteration;
    out << ',';
    if (p.a_merge) out << *p.a_merge;
    out << ',';
    if (p.l_hat) out << format_real(*p.l_hat);
    out << ',';
    if (p.lw_ratio) out << format_real(*p.lw_ratio);
    out << ',' << p.n_pix << ',' << p.n_edge << ',';
    if (p.a_cumulative) out << *p.a_cumulative;
    out << '\n';
  }
}

}  // namespace crownhac
