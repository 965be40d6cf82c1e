#pragma once

/// @file termination.hpp
/// @brief Locally adaptive termination of the agglomeration hierarchy.
///
/// Along the linear path from each singleton the chosen parameter is scaled to
/// [0,1] and differenced by path index. A break point is an index j >= 1 where
/// the running maximum of the differences steps up, i.e. D_j exceeds every
/// earlier D_k. Break points are tallied on the merge node that produced them;
/// nodes whose tally lies in the upper tail of the tally histogram are
/// removed together with all of their successors. The surviving terminal
/// nodes are the candidate clusters.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "crownhac/format.hpp"
#include "crownhac/hac.hpp"
#include "crownhac/params.hpp"

namespace crownhac {

/// How differences are taken along a path. Only the path-index difference is
/// implemented; the iteration-normalised rate is reserved.
enum class DifferenceMode { path_index, merge_iteration };

struct TerminationOptions {
  /// Right-tail fraction of the break-count histogram that is trimmed.
  double significance_p = 0.25;
  DifferenceMode difference = DifferenceMode::path_index;
  /// Order of the difference; only first differences are implemented.
  int difference_order = 1;

  void validate() const {
    if (!(significance_p > 0.0 && significance_p < 1.0))
      throw std::invalid_argument("significance p must lie strictly between 0 and 1");
    if (difference != DifferenceMode::path_index)
      throw std::invalid_argument("iteration-normalised differences are not supported");
    if (difference_order != 1) throw std::invalid_argument("only first-order differences are supported");
  }
};

/// Scaled values, first differences, running maxima and break points of one
/// raw sequence.
struct SequenceAnalysis {
  std::vector<double> raw;
  std::vector<double> f;
  std::vector<double> d;
  std::vector<double> cmax;
  std::vector<std::size_t> breakpoints;
};

inline SequenceAnalysis analyze_sequence(std::span<const double> raw) {
  SequenceAnalysis out;
  out.raw.assign(raw.begin(), raw.end());
  out.f.assign(raw.size(), 0.0);
  double span = 0.0;
  if (!raw.empty()) {
    const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
    span = *hi - *lo;
    if (span > 0.0)
      for (std::size_t j = 0; j < raw.size(); ++j) out.f[j] = (raw[j] - *lo) / span;
  }
  // Differencing before scaling keeps equal raw steps exactly equal.
  for (std::size_t j = 0; j + 1 < out.f.size(); ++j) {
    out.d.push_back(span > 0.0 ? (raw[j + 1] - raw[j]) / span : 0.0);
    out.cmax.push_back(j == 0 ? out.d[0] : std::max(out.cmax[j - 1], out.d[j]));
  }
  for (std::size_t j = 1; j < out.cmax.size(); ++j)
    if (out.cmax[j] != out.cmax[j - 1]) out.breakpoints.push_back(j);
  return out;
}

struct PathTrace {
  NodeId start = 0;
  std::vector<NodeId> nodes;
  SequenceAnalysis values;
};

/// Traces the path from singleton h0. The singleton itself has no merge value
/// and contributes 0 as the first raw value.
inline PathTrace trace_path(const Hierarchy& hier, const NodeStream& stream, NodeId h0) {
  if (!hier.node(h0).is_singleton()) throw std::invalid_argument("trace must start at a singleton node");
  if (stream.size() != hier.size()) throw std::invalid_argument("stream does not match hierarchy");
  PathTrace t;
  t.start = h0;
  t.nodes = hier.path_from(h0);
  std::vector<double> raw;
  raw.reserve(t.nodes.size());
  for (NodeId n : t.nodes) raw.push_back(hier.node(n).is_singleton() ? 0.0 : stream[n].value_or(0.0));
  t.values = analyze_sequence(raw);
  return t;
}

/// One trace per singleton, in singleton id order.
inline std::vector<PathTrace> trace_all(const Hierarchy& hier, const NodeStream& stream) {
  std::vector<PathTrace> out;
  out.reserve(hier.isol_count());
  for (NodeId h = 0; h < hier.isol_count(); ++h) out.push_back(trace_path(hier, stream, h));
  return out;
}

struct BreakCounts {
  /// F(h) per NodeId.
  std::vector<std::uint32_t> counts;
  std::uint32_t significance = 0;
  double p = 0.25;
};

/// Smallest v with (#merge nodes whose count exceeds v) <= p * (#merge nodes).
inline std::uint32_t significance_threshold(const Hierarchy& hier, std::span<const std::uint32_t> counts, double p) {
  std::vector<std::uint32_t> merge_counts;
  for (const HierarchyNode& n : hier.nodes())
    if (!n.is_singleton()) merge_counts.push_back(counts[n.id]);
  if (merge_counts.empty()) return 0;
  std::sort(merge_counts.begin(), merge_counts.end());
  const double total = static_cast<double>(merge_counts.size());
  // Candidate thresholds are 0 and the distinct counts; the tail fraction only
  // changes at those values.
  std::vector<std::uint32_t> candidates{0};
  candidates.insert(candidates.end(), merge_counts.begin(), merge_counts.end());
  for (std::uint32_t v : candidates) {
    const auto above = static_cast<double>(merge_counts.end() -
                                           std::upper_bound(merge_counts.begin(), merge_counts.end(), v));
    if (above <= p * total) return v;
  }
  return merge_counts.back();
}

/// Tallies break points: break j on a path lands on nodes[j+1], the merge
/// whose formation produced D_j.
inline BreakCounts count_breaks(const Hierarchy& hier, std::span<const PathTrace> traces, double p = 0.25) {
  BreakCounts bc;
  bc.p = p;
  bc.counts.assign(hier.size(), 0);
  std::vector<bool> seen(hier.isol_count(), false);
  for (const PathTrace& t : traces) {
    if (t.start >= hier.isol_count()) throw std::invalid_argument("trace does not start at a singleton");
    seen[t.start] = true;
    for (std::size_t j : t.values.breakpoints) ++bc.counts[t.nodes.at(j + 1)];
  }
  for (NodeId h = 0; h < hier.isol_count(); ++h)
    if (!seen[h]) throw std::invalid_argument("missing trace for singleton node " + std::to_string(h));
  bc.significance = significance_threshold(hier, bc.counts, p);
  return bc;
}

struct TrimmedHierarchy {
  /// Sorted.
  std::vector<NodeId> removed;
  /// Surviving nodes without a surviving successor, sorted.
  std::vector<NodeId> terminals;
};

/// Removes every node with a count above the significance value, plus all of
/// its successors.
inline TrimmedHierarchy trim(const Hierarchy& hier, const BreakCounts& counts) {
  if (counts.counts.size() != hier.size()) throw std::invalid_argument("break counts do not match hierarchy");
  std::vector<bool> removed(hier.size(), false);
  // Successors have larger ids, so one ascending sweep closes the set.
  for (const HierarchyNode& n : hier.nodes()) {
    if (counts.counts[n.id] > counts.significance) removed[n.id] = true;
    if (n.ancestors && (removed[(*n.ancestors)[0]] || removed[(*n.ancestors)[1]])) removed[n.id] = true;
  }
  TrimmedHierarchy out;
  for (const HierarchyNode& n : hier.nodes()) {
    if (removed[n.id]) {
      out.removed.push_back(n.id);
    } else if (!n.successor || removed[*n.successor]) {
      out.terminals.push_back(n.id);
    }
  }
  return out;
}

/// Terminals whose group holds at least min_size ISOLs.
inline std::vector<NodeId> filter_terminals(const TrimmedHierarchy& trimmed, const Hierarchy& hier,
                                            std::size_t min_size) {
  std::vector<NodeId> out;
  for (NodeId t : trimmed.terminals)
    if (hier.node(t).members.size() >= min_size) out.push_back(t);
  return out;
}

/// (count value, number of merge nodes with that count), ascending.
inline std::vector<std::pair<std::uint32_t, std::size_t>> break_histogram(const Hierarchy& hier,
                                                                          const BreakCounts& counts) {
  std::map<std::uint32_t, std::size_t> hist;
  for (const HierarchyNode& n : hier.nodes())
    if (!n.is_singleton()) ++hist[counts.counts[n.id]];
  return {hist.begin(), hist.end()};
}

inline void write_trace_csv(std::ostream& out, const PathTrace& t) {
  out << "j,node_id,f,D,Cmax,is_break\n";
  const auto& v = t.values;
  for (std::size_t j = 0; j < v.d.size(); ++j) {
    const bool is_break = std::binary_search(v.breakpoints.begin(), v.breakpoints.end(), j);
    out << j << ',' << t.nodes[j + 1] << ',' << format_real(v.f[j + 1]) << ',' << format_real(v.d[j]) << ','
        << format_real(v.cmax[j]) << ',' << (is_break ? 1 : 0) << '\n';
  }
}

inline void write_histogram_csv(std::ostream& out, const Hierarchy& hier, const BreakCounts& counts) {
  out << "count_value,num_nodes\n";
  for (const auto& [value, num] : break_histogram(hier, counts)) out << value << ',' << num << '\n';
}

}  // namespace crownhac
