// crownhac command line: run the full pipeline, dump a single path trace, or
// generate synthetic scenes.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "crownhac/pipeline.hpp"

namespace {

constexpr int kExitInput = 2;
constexpr int kExitIo = 1;

struct CommonFlags {
  std::string input;
  std::string format = "auto";
  std::string param = "a_merge";
  double significance_p = 0.25;
  std::size_t min_size = 7;
  std::optional<std::size_t> max_ray;
  std::string score = "mean";
  std::string out = "out";
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--input", f.input, "Labeled raster (text grid or PGM)")->required();
  cmd->add_option("--format", f.format, "text, pgm or auto")->check(CLI::IsMember({"auto", "text", "pgm"}));
  cmd->add_option("--param", f.param,
                  "a_merge, lw_over_acum, n_pix, n_edge, a_cumulative, lw_ratio, l_hat or NUM/DEN");
  cmd->add_option("--significance-p", f.significance_p, "Right-tail fraction of the break-count histogram");
  cmd->add_option("--min-size", f.min_size, "Smallest reported group, in ISOLs");
  cmd->add_option("--max-ray", f.max_ray, "Longest ray in background pixels (default unlimited)");
  cmd->add_option("--score", f.score, "Ranking key: mean or sum")->check(CLI::IsMember({"mean", "sum"}));
}

crownhac::PipelineConfig to_config(const CommonFlags& f) {
  crownhac::PipelineConfig cfg;
  cfg.input = f.input;
  if (f.format == "text") cfg.format = crownhac::RasterFormat::text_grid;
  if (f.format == "pgm") cfg.format = crownhac::RasterFormat::pgm;
  cfg.analysis.parameter = crownhac::ParameterChoice::parse(f.param);
  cfg.analysis.termination.significance_p = f.significance_p;
  cfg.analysis.min_group_size = f.min_size;
  cfg.analysis.rays.max_ray = f.max_ray;
  cfg.analysis.score = crownhac::parse_score_key(f.score);
  cfg.out_dir = f.out;
  cfg.analysis.validate();
  return cfg;
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const crownhac::OutputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const crownhac::RasterError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::out_of_range& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Locally adaptive termination of connective-distance clustering over segment rasters"};
  app.require_subcommand(1);

  CommonFlags run_flags;
  bool dump_links = false;
  auto* run = app.add_subcommand("run", "Run the full pipeline and write reports");
  add_common(run, run_flags);
  run->add_option("--out", run_flags.out, "Output directory");
  run->add_flag("--dump-links", dump_links, "Also write links.csv");

  CommonFlags trace_flags;
  std::uint32_t trace_isol = 0;
  std::string trace_out;
  auto* trace = app.add_subcommand("trace", "Write the path trace for one ISOL");
  add_common(trace, trace_flags);
  trace->add_option("--isol", trace_isol, "ISOL id whose path is traced")->required();
  trace->add_option("--out", trace_out, "Output CSV file (default stdout)");

  std::string synth_kind = "ring";
  std::uint64_t seed = 1;
  int k = 8, gap = 2, outliers = 4, size = 192, n = 12;
  std::string synth_out = "scene";
  auto* synth = app.add_subcommand("synth", "Generate a synthetic scene");
  synth->add_option("kind", synth_kind, "ring or random")->check(CLI::IsMember({"ring", "random"}));
  synth->add_option("--seed", seed, "Generator seed");
  synth->add_option("--k", k, "ISOLs on the ring");
  synth->add_option("--gap", gap, "Background pixels between ring neighbours");
  synth->add_option("--outliers", outliers, "Large blobs away from the ring");
  synth->add_option("--size", size, "Raster side in pixels");
  synth->add_option("--n", n, "ISOL count for random scenes");
  synth->add_option("--out", synth_out, "Output directory (scene.txt, truth.json)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitInput;
  }

  if (run->parsed()) {
    return guarded([&] {
      auto cfg = to_config(run_flags);
      cfg.dump_links = dump_links;
      const auto a = crownhac::run_pipeline(cfg);
      std::cout << a.isols.size() << " ISOLs, " << a.hierarchy.merge_count() << " merges, "
                << a.trimmed.terminals.size() << " terminals, " << a.ranked.size() << " candidates -> "
                << cfg.out_dir.string() << '\n';
      return 0;
    });
  }
  if (trace->parsed()) {
    return guarded([&] {
      const auto cfg = to_config(trace_flags);
      if (trace_out.empty()) {
        crownhac::trace_command(cfg, trace_isol, std::cout);
        return 0;
      }
      std::ofstream out(trace_out, std::ios::binary);
      if (!out) throw crownhac::OutputError("cannot write '" + trace_out + "'");
      crownhac::trace_command(cfg, trace_isol, out);
      if (!out.flush()) throw crownhac::OutputError("failed writing '" + trace_out + "'");
      return 0;
    });
  }
  return guarded([&] {
    const auto scene = synth_kind == "ring" ? crownhac::generate_ring(seed, k, gap, outliers, size)
                                            : crownhac::generate_random(seed, n, size);
    const std::filesystem::path dir = synth_out;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw crownhac::OutputError("cannot create '" + dir.string() + "'");
    std::ofstream grid(dir / "scene.txt", std::ios::binary);
    std::ofstream truth(dir / "truth.json", std::ios::binary);
    if (!grid || !truth) throw crownhac::OutputError("cannot write into '" + dir.string() + "'");
    crownhac::write_text_grid(grid, scene.raster);
    truth << crownhac::truth_json(scene).dump(2) << '\n';
    if (!grid.flush() || !truth.flush()) throw crownhac::OutputError("failed writing scene files");
    std::cout << "wrote " << (dir / "scene.txt").string() << '\n';
    return 0;
  });
}
