#pragma once

/// @file pipeline.hpp
/// @brief End-to-end analysis: raster -> links -> hierarchy -> parameters ->
/// termination -> ranked candidates, and the report files it produces.

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "crownhac/hac.hpp"
#include "crownhac/links.hpp"
#include "crownhac/params.hpp"
#include "crownhac/ranking.hpp"
#include "crownhac/raster.hpp"
#include "crownhac/synth.hpp"
#include "crownhac/termination.hpp"

namespace crownhac {

inline constexpr int kReportSchema = 1;

struct AnalysisOptions {
  ParameterChoice parameter = ParameterChoice::a_merge();
  TerminationOptions termination;
  std::size_t min_group_size = 7;
  RayOptions rays;
  ScoreKey score = ScoreKey::mean;

  void validate() const {
    termination.validate();
    if (min_group_size < 1) throw std::invalid_argument("minimum group size must be at least 1");
  }
};

struct Analysis {
  LabeledRaster raster{1, 1};
  std::vector<Isol> isols;
  LinkStore links;
  Hierarchy hierarchy;
  ParamTable params;
  NodeStream stream;
  std::vector<PathTrace> traces;
  BreakCounts counts;
  TrimmedHierarchy trimmed;
  std::vector<NodeId> candidates;
  std::vector<RankedCandidate> ranked;
};

inline Analysis analyze(LabeledRaster raster, const AnalysisOptions& opts) {
  opts.validate();
  Analysis a;
  a.raster = std::move(raster);
  a.isols = extract_isols(a.raster);
  a.links = cast_rays(a.raster, a.isols, opts.rays);
  a.counts.p = opts.termination.significance_p;
  if (a.isols.empty()) return a;

  a.hierarchy = agglomerate(a.isols, a.links);
  a.params = compute_params(a.hierarchy, a.isols, a.links);
  a.stream = parameter_stream(a.hierarchy, a.params, opts.parameter);
  a.traces = trace_all(a.hierarchy, a.stream);
  a.counts = count_breaks(a.hierarchy, a.traces, opts.termination.significance_p);
  a.trimmed = trim(a.hierarchy, a.counts);
  a.candidates = filter_terminals(a.trimmed, a.hierarchy, opts.min_group_size);
  a.ranked = rank_candidates(a.hierarchy, a.isols, a.candidates, opts.score);
  return a;
}

inline nlohmann::json hierarchy_json(const Hierarchy& hier) {
  auto out = nlohmann::json::array();
  for (const HierarchyNode& n : hier.nodes()) {
    nlohmann::json j;
    j["id"] = n.id;
    j["members"] = n.members;
    j["ancestors"] = n.ancestors ? nlohmann::json{(*n.ancestors)[0], (*n.ancestors)[1]} : nlohmann::json::array();
    j["successor"] = n.successor ? nlohmann::json(*n.successor) : nlohmann::json(nullptr);
    j["merge_iteration"] = n.merge_iteration ? nlohmann::json(*n.merge_iteration) : nlohmann::json(nullptr);
    j["merge_distance"] = (n.merge_distance && n.merge_distance->is_finite())
                              ? nlohmann::json(n.merge_distance->value())
                              : nlohmann::json(nullptr);
    out.push_back(std::move(j));
  }
  return out;
}

inline nlohmann::json report_json(const Analysis& a, const AnalysisOptions& opts) {
  nlohmann::json r;
  r["schema"] = kReportSchema;
  r["parameter"] = opts.parameter.name();
  r["significance_p"] = opts.termination.significance_p;
  r["f_significance"] = a.counts.significance;
  r["min_group_size"] = opts.min_group_size;
  r["score_key"] = std::string(to_string(opts.score));
  r["isol_count"] = a.isols.size();
  r["terminal_count"] = a.trimmed.terminals.size();
  auto cands = nlohmann::json::array();
  for (const RankedCandidate& c : a.ranked) {
    const HierarchyNode& n = a.hierarchy.node(c.node);
    nlohmann::json j;
    j["rank"] = c.rank;
    j["node_id"] = c.node;
    j["merge_iteration"] = n.merge_iteration ? nlohmann::json(*n.merge_iteration) : nlohmann::json(nullptr);
    j["member_count"] = n.members.size();
    j["members"] = n.members;
    j["pixel_count"] = c.stats.pixel_count;
    j["centroid"] = {c.stats.centroid[0], c.stats.centroid[1]};
    j["MAD"] = c.stats.mean_abs_dev;
    j["MaxAD"] = c.stats.max_abs_dev;
    j["S"] = c.stats.score;
    j["sum_abs_dev"] = c.stats.sum_abs_dev;
    j["S_sum"] = c.stats.ratio_table;
    cands.push_back(std::move(j));
  }
  r["candidates"] = std::move(cands);
  return r;
}

/// Candidates painted with their rank as label.
inline LabeledRaster candidate_raster(const Analysis& a) {
  std::vector<ClusterGroup> groups;
  for (const RankedCandidate& c : a.ranked)
    groups.push_back({static_cast<Label>(c.rank), a.hierarchy.node(c.node).members});
  return write_cluster_raster(a.raster, groups);
}

struct PipelineConfig {
  std::string input;
  /// Guessed from the extension when absent.
  std::optional<RasterFormat> format;
  AnalysisOptions analysis;
  std::filesystem::path out_dir = "out";
  bool dump_links = false;
};

/// Thrown when an output file cannot be written.
class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw OutputError("cannot write '" + p.string() + "'");
  return out;
}

inline void finish(std::ofstream& out, const std::filesystem::path& p) {
  out.flush();
  if (!out) throw OutputError("failed writing '" + p.string() + "'");
}

}  // namespace detail

inline LabeledRaster load_input(const PipelineConfig& cfg) {
  return load_raster_file(cfg.input, cfg.format.value_or(guess_format(cfg.input)));
}

/// Writes report.json, hierarchy.json, params.csv, histogram.csv,
/// traces/<isol>.csv and clusters.pgm (plus links.csv on request) into out_dir.
inline Analysis run_pipeline(const PipelineConfig& cfg) {
  cfg.analysis.validate();
  Analysis a = analyze(load_input(cfg), cfg.analysis);

  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(cfg.out_dir / "traces", ec);
  if (ec) throw OutputError("cannot create '" + (cfg.out_dir / "traces").string() + "': " + ec.message());

  auto write = [](const fs::path& p, auto&& body) {
    auto out = detail::open_output(p);
    body(out);
    detail::finish(out, p);
  };
  write(cfg.out_dir / "report.json", [&](std::ostream& o) { o << report_json(a, cfg.analysis).dump(2) << '\n'; });
  write(cfg.out_dir / "hierarchy.json", [&](std::ostream& o) { o << hierarchy_json(a.hierarchy).dump(2) << '\n'; });
  write(cfg.out_dir / "params.csv", [&](std::ostream& o) { write_params_csv(o, a.hierarchy, a.params); });
  write(cfg.out_dir / "histogram.csv", [&](std::ostream& o) { write_histogram_csv(o, a.hierarchy, a.counts); });
  write(cfg.out_dir / "clusters.pgm", [&](std::ostream& o) { write_pgm(o, candidate_raster(a)); });
  for (const PathTrace& t : a.traces) {
    const IsolId isol = a.hierarchy.node(t.start).members.front();
    write(cfg.out_dir / "traces" / (std::to_string(isol) + ".csv"), [&](std::ostream& o) { write_trace_csv(o, t); });
  }
  if (cfg.dump_links)
    write(cfg.out_dir / "links.csv", [&](std::ostream& o) { write_links_csv(o, a.links); });
  return a;
}

/// Emits the trace CSV for the path starting at one ISOL.
inline PathTrace trace_command(const PipelineConfig& cfg, IsolId isol, std::ostream& out) {
  cfg.analysis.validate();
  const LabeledRaster raster = load_input(cfg);
  const auto isols = extract_isols(raster);
  if (!find_isol(isols, isol)) throw std::out_of_range("unknown ISOL id " + std::to_string(isol));
  const auto store = cast_rays(raster, isols, cfg.analysis.rays);
  const auto hier = agglomerate(isols, store);
  const auto params = compute_params(hier, isols, store);
  const auto stream = parameter_stream(hier, params, cfg.analysis.parameter);
  PathTrace t = trace_path(hier, stream, hier.singleton(isol));
  write_trace_csv(out, t);
  return t;
}

inline nlohmann::json truth_json(const SynthScene& scene) {
  return {{"seed", scene.seed}, {"truth_groups", scene.truth_groups}};
}

}  // namespace crownhac
