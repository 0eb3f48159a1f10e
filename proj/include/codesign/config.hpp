#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "codesign/design_space.hpp"
#include "codesign/metrics.hpp"
#include "codesign/optimizer.hpp"
#include "codesign/sim.hpp"
#include "codesign/terrain.hpp"

// Run configuration. A user file is a JSON object whose sections mirror the
// module names; it is merged over the built-in defaults (config/default.json)
// so it only needs the fields it changes. Unknown keys, wrong types and
// out-of-range values are rejected with the dotted path of the field.
namespace codesign {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TerrainSettings {
  Extent extent;
  double flat_mu = 0.9;
  std::uint64_t rough_seed = 1;
  double rough_amplitude_m = 0.01;
  double rough_correlation_m = 0.05;
  double rough_mu = 0.9;
  double stairs_step_height_m = 0.03;
  double stairs_step_depth_m = 0.15;
  double stairs_mu = 0.9;
  double ramp_slope_deg = 15.0;
  double ramp_mu_low = 0.3;
  double ramp_mu_default = 0.9;
};

struct RunConfig {
  Design nominal;
  Bounds bounds;
  int chain_segments = 16;
  TerrainSettings terrain;
  sim::SimConfig sim;
  metrics::MetricsConfig metrics;
  opt::OptOptions optimizer;
  opt::ObjectiveKind objective = opt::ObjectiveKind::efficiency;
  int repetitions = 8;
  std::string out_dir = "runs";
};

const nlohmann::json& default_config_json();

/// Applies `overrides` (RFC 7386 merge patch) to the defaults and parses.
RunConfig parse_config(const nlohmann::json& overrides);
RunConfig default_config();
RunConfig load_config(const std::filesystem::path& path);

/// Terrain instance for a run. Repetition r of the rough terrain uses seed
/// rough_seed + r; other terrains ignore the repetition.
Terrain make_terrain(const TerrainSettings& settings, TerrainKind kind, int repetition = 0);

/// Seed actually used by make_terrain (0 for seedless terrains).
std::uint64_t terrain_seed(const TerrainSettings& settings, TerrainKind kind, int repetition);

}  // namespace codesign
