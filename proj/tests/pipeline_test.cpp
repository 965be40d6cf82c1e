#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include "crownhac/pipeline.hpp"

using namespace crownhac;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  explicit TempDir(const std::string& name)
      : path_(fs::temp_directory_path() / ("crownhac_" + name + "_" + std::to_string(::getpid()))) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_scene(const fs::path& p, const LabeledRaster& r) {
  std::ofstream out(p, std::ios::binary);
  write_text_grid(out, r);
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(CROWNHAC_CLI) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST(Pipeline, ZeroIsolRaster) {
  TempDir dir("empty");
  write_scene(dir.path() / "in.txt", LabeledRaster(4, 3));
  PipelineConfig cfg;
  cfg.input = (dir.path() / "in.txt").string();
  cfg.out_dir = dir.path() / "out";
  const auto a = run_pipeline(cfg);
  EXPECT_TRUE(a.ranked.empty());
  const auto report = nlohmann::json::parse(slurp(cfg.out_dir / "report.json"));
  EXPECT_EQ(report["schema"], 1);
  EXPECT_EQ(report["isol_count"], 0);
  EXPECT_TRUE(report["candidates"].empty());
  EXPECT_TRUE(fs::exists(cfg.out_dir / "clusters.pgm"));
  EXPECT_EQ(run_cli("run --input " + cfg.input + " --out " + (dir.path() / "cli").string()), 0);
}

TEST(Pipeline, RingRecoveredByBothParameters) {
  const auto scene = generate_ring(5, 8, 2, 4, 192);
  for (const char* param : {"a_merge", "lw_over_acum"}) {
    AnalysisOptions opts;
    opts.parameter = ParameterChoice::parse(param);
    const auto a = analyze(scene.raster, opts);
    ASSERT_FALSE(a.ranked.empty()) << param;
    EXPECT_EQ(a.hierarchy.node(a.ranked[0].node).members, scene.truth_groups[0]) << param;

    std::set<IsolId> seen;
    for (const auto& c : a.ranked)
      for (IsolId m : a.hierarchy.node(c.node).members) EXPECT_TRUE(seen.insert(m).second);
    const auto report = report_json(a, opts);
    EXPECT_EQ(report["parameter"], param);
    EXPECT_EQ(report["candidates"][0]["rank"], 1);
    EXPECT_EQ(report["candidates"][0]["members"].get<std::vector<IsolId>>(), scene.truth_groups[0]);
  }
}

TEST(Pipeline, OutputsAreByteIdentical) {
  TempDir dir("determinism");
  write_scene(dir.path() / "scene.txt", generate_ring(8, 8, 2, 3, 160).raster);
  std::vector<std::map<std::string, std::string>> runs;
  for (const char* out : {"a", "b"}) {
    PipelineConfig cfg;
    cfg.input = (dir.path() / "scene.txt").string();
    cfg.out_dir = dir.path() / out;
    cfg.dump_links = true;
    run_pipeline(cfg);
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(cfg.out_dir))
      if (e.is_regular_file()) files[fs::relative(e.path(), cfg.out_dir).string()] = slurp(e.path());
    runs.push_back(std::move(files));
  }
  EXPECT_EQ(runs[0], runs[1]);
  EXPECT_TRUE(runs[0].count("links.csv"));
  EXPECT_TRUE(runs[0].count("traces/1.csv"));
  EXPECT_EQ(runs[0].size(), 6u + 11u);
}

TEST(Pipeline, TraceCommand) {
  TempDir dir("trace");
  const auto scene = generate_random(31, 10, 40);
  write_scene(dir.path() / "scene.txt", scene.raster);
  PipelineConfig cfg;
  cfg.input = (dir.path() / "scene.txt").string();
  for (IsolId isol = 1; isol <= 10; ++isol) {
    std::ostringstream out;
    const auto t = trace_command(cfg, isol, out);
    std::istringstream lines(out.str());
    std::string line;
    std::getline(lines, line);
    EXPECT_EQ(line, "j,node_id,f,D,Cmax,is_break");
    std::size_t rows = 0;
    double prev_cmax = -1e300;
    std::size_t j = 0;
    while (std::getline(lines, line)) {
      ++rows;
      std::vector<std::string> cols;
      std::stringstream ss(line);
      for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
      ASSERT_EQ(cols.size(), 6u);
      const double cmax = std::stod(cols[4]);
      EXPECT_GE(cmax, prev_cmax);
      EXPECT_EQ(cols[5] == "1", j >= 1 && cmax > prev_cmax) << line;
      prev_cmax = cmax;
      ++j;
    }
    EXPECT_EQ(rows, t.nodes.size() - 1);
  }
  std::ostringstream sink;
  EXPECT_THROW(trace_command(cfg, 99, sink), std::out_of_range);
}

TEST(Pipeline, OptionValidation) {
  AnalysisOptions o;
  o.min_group_size = 0;
  EXPECT_THROW(o.validate(), std::invalid_argument);
  o = {};
  o.termination.significance_p = 0.0;
  EXPECT_THROW(o.validate(), std::invalid_argument);
}

TEST(Cli, ExitCodes) {
  TempDir dir("cli");
  const std::string d = dir.path().string();
  ASSERT_EQ(run_cli("synth ring --seed 3 --out " + d + "/scene"), 0);
  EXPECT_TRUE(fs::exists(dir.path() / "scene" / "truth.json"));
  const auto truth = nlohmann::json::parse(slurp(dir.path() / "scene" / "truth.json"));
  EXPECT_EQ(truth["seed"], 3);
  EXPECT_EQ(truth["truth_groups"].size(), 5u);

  const std::string in = "--input " + d + "/scene/scene.txt";
  EXPECT_EQ(run_cli("run " + in + " --out " + d + "/out"), 0);
  const auto report = nlohmann::json::parse(slurp(dir.path() / "out" / "report.json"));
  EXPECT_EQ(report["candidates"][0]["members"], truth["truth_groups"][0]);
  EXPECT_EQ(run_cli("run " + in + " --param lw_over_acum --score sum --out " + d + "/out2"), 0);
  EXPECT_EQ(run_cli("trace " + in + " --isol 2 --out " + d + "/t.csv"), 0);
  EXPECT_TRUE(fs::exists(dir.path() / "t.csv"));

  EXPECT_EQ(run_cli("run --input " + d + "/missing.txt --out " + d + "/x"), 2);
  EXPECT_EQ(run_cli("run " + in + " --param volume"), 2);
  EXPECT_EQ(run_cli("run " + in + " --significance-p 1.5"), 2);
  EXPECT_EQ(run_cli("run " + in + " --min-size 0"), 2);
  EXPECT_EQ(run_cli("trace " + in + " --isol 77"), 2);
  EXPECT_EQ(run_cli("run"), 2);
  EXPECT_EQ(run_cli("synth ring --outliers 9 --out " + d + "/bad"), 2);

  std::ofstream(dir.path() / "bad.txt") << "1 0\n0 q\n";
  EXPECT_EQ(run_cli("run --input " + d + "/bad.txt --out " + d + "/y"), 2);
  std::ofstream(dir.path() / "blocker") << "file";
  EXPECT_EQ(run_cli("run " + in + " --out " + d + "/blocker/out"), 1);
}
