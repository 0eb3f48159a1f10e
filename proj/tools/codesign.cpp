// Command-line front end: optimize, cross-eval, simulate, export, report.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "codesign/compliance.hpp"
#include "codesign/config.hpp"
#include "codesign/harness.hpp"
#include "codesign/sim.hpp"

namespace fs = std::filesystem;
using namespace codesign;

namespace {

constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
};

RunConfig load(const Globals& g) {
  RunConfig c = g.config_path.empty() ? default_config() : load_config(g.config_path);
  if (g.seed) c.optimizer.seed = *g.seed;
  if (!g.out.empty()) c.out_dir = g.out;
  return c;
}

TerrainKind terrain_arg(const std::string& name) {
  try {
    return terrain_kind_from_string(name);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int cmd_optimize(const Globals& g, const std::string& terrain_name) {
  const RunConfig c = load(g);
  const TerrainKind terrain = terrain_arg(terrain_name);
  const auto t0 = std::chrono::steady_clock::now();
  const auto run = harness::run_codesign(c, terrain, c.out_dir);
  const auto& best = run.history.best();
  std::printf("terrain %s, %zu trials, best at iter %d: efficiency %.5g m/J, speed %.4g m/s\n",
              std::string(to_string(terrain)).c_str(), run.history.trials.size(), best.iter,
              best.value.efficiency_m_per_j, best.value.speed_m_per_s);
  std::printf("nominal: efficiency %.5g m/J, speed %.4g m/s\n", run.nominal.efficiency_m_per_j,
              run.nominal.speed_m_per_s);
  std::printf("wrote %s (%.1f s)\n", run.dir.string().c_str(), seconds_since(t0));
  return 0;
}

int cmd_cross_eval(const Globals& g, const std::vector<std::string>& files) {
  const RunConfig c = load(g);
  std::vector<harness::DesignEntry> designs{{"nominal", "config", c.nominal}};
  std::vector<std::string> paths = files;
  if (paths.empty()) {
    for (auto t : harness::kAllTerrains) {
      const fs::path p = fs::path(c.out_dir) / std::string(to_string(t)) / "best_design.json";
      if (fs::exists(p)) paths.push_back(p.string());
    }
  }
  for (const auto& p : paths) {
    const fs::path path(p);
    std::string name = path.stem().string();
    if (name == "best_design" && path.has_parent_path()) {
      name = path.parent_path().filename().string();
    }
    designs.push_back({name, p, harness::read_design_file(path)});
  }
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<TerrainKind> terrains(harness::kAllTerrains.begin(),
                                          harness::kAllTerrains.end());
  const auto m = harness::cross_evaluate(designs, terrains, c);
  const fs::path dir = fs::path(c.out_dir) / "cross_eval";
  harness::write_cross_eval(m, dir);
  std::printf("%zu designs x %zu terrains x %d repetitions, wrote %s (%.1f s)\n",
              designs.size(), terrains.size(), c.repetitions, dir.string().c_str(),
              seconds_since(t0));
  return 0;
}

int cmd_simulate(const Globals& g, const std::string& design_file,
                 const std::string& terrain_name) {
  const RunConfig c = load(g);
  const TerrainKind terrain = terrain_arg(terrain_name);
  const Design design = harness::read_design_file(design_file);
  const Terrain ground = make_terrain(c.terrain, terrain);
  const auto trial = sim::run_trial(design, ground, c.sim);

  fs::create_directories(c.out_dir);
  const fs::path trace = fs::path(c.out_dir) / ("trace_" + std::string(to_string(terrain)) + ".csv");
  {
    std::ofstream out(trace, std::ios::binary);
    if (!out) throw harness::HarnessError(trace.string() + ": cannot open for writing");
    sim::write_trial_log(out, trial);
  }
  std::printf("outcome: %s\n", sim::to_string(trial.outcome));
  try {
    const auto v = metrics::efficiency(trial, c.metrics);
    std::printf("displacement %.5g m, avg power %.5g W, efficiency %.5g m/J, speed %.4g m/s\n",
                v.displacement_m, v.avg_power_w, v.efficiency_m_per_j, v.speed_m_per_s);
  } catch (const metrics::DegenerateTrialError& e) {
    std::printf("no energy spent: %s\n", e.what());
  }

  // Chain check of the wheg spring used by the simulator.
  const auto section = compliance::BeamSection::rectangular(
      c.sim.youngs_modulus_pa, c.sim.wheg_width_m, design.morph.thickness_m);
  const double k = compliance::tip_stiffness(section, design.morph.front_len_m);
  auto chain = compliance::discretize_wheg(design.morph.front_len_m, c.chain_segments);
  chain.joint_stiffnesses = compliance::joint_stiffnesses(chain, k);
  const double force = 1e-4 * section.flexural_rigidity() /
                       (design.morph.front_len_m * design.morph.front_len_m);
  const double dy = compliance::static_deflection_oracle(chain, force);
  std::printf("front wheg K %.5g N/m, %d-segment chain K %.5g N/m\n", k, c.chain_segments,
              force / dy);
  std::printf("wrote %s\n", trace.string().c_str());
  return 0;
}

int cmd_export(const Globals& g, const std::string& design_file, int arc_points) {
  const RunConfig c = load(g);
  const Design design = harness::read_design_file(design_file);
  harness::export_geometry(design, c.out_dir, arc_points);
  std::printf("wrote wheg_front.txt and wheg_back.txt in %s\n", c.out_dir.c_str());
  return 0;
}

int cmd_report(const Globals& g) {
  const RunConfig c = load(g);
  const std::string text = harness::report(c.out_dir);
  std::cout << text;
  const fs::path path = fs::path(c.out_dir) / "report.txt";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw harness::HarnessError(path.string() + ": cannot open for writing");
  out << text;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wheg hexapod morphology and gait co-design"};
  app.require_subcommand(1);
  Globals g;
  std::uint64_t seed = 0;
  app.add_option("--config", g.config_path, "JSON config merged over the defaults");
  auto* seed_opt = app.add_option("--seed", seed, "Optimizer seed");
  app.add_option("--out", g.out, "Output directory (overrides harness.out_dir)");

  std::string terrain;
  auto* optimize = app.add_subcommand("optimize", "Co-design for one terrain");
  optimize->add_option("terrain", terrain, "flat | rough | stairs | ramp")->required();

  std::vector<std::string> design_files;
  auto* cross = app.add_subcommand(
      "cross-eval", "Evaluate designs on every terrain (default: nominal plus <out>/*/best_design.json)");
  cross->add_option("designs", design_files, "Design files");

  std::string design_file;
  auto* simulate = app.add_subcommand("simulate", "Run one trial and write its trace");
  simulate->add_option("design-file", design_file)->required();
  simulate->add_option("terrain", terrain)->required();

  int arc_points = 64;
  auto* exp = app.add_subcommand("export", "Write wheg outlines");
  exp->add_option("design-file", design_file)->required();
  exp->add_option("--arc-points", arc_points, "Vertices per arc")->check(CLI::Range(2, 100000));

  auto* rep = app.add_subcommand("report", "Summarize the runs under the output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }
  if (*seed_opt) g.seed = seed;

  try {
    if (*optimize) return cmd_optimize(g, terrain);
    if (*cross) return cmd_cross_eval(g, design_files);
    if (*simulate) return cmd_simulate(g, design_file, terrain);
    if (*exp) return cmd_export(g, design_file, arc_points);
    if (*rep) return cmd_report(g);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kRuntimeError;
  }
  return 0;
}
