#include "codesign/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "default_config.hpp"

namespace codesign {

using nlohmann::json;

namespace {

const char* type_name(const json& j) {
  if (j.is_number_integer()) return "integer";
  return j.type_name();
}

// Every key of `value` must exist in `schema` with a compatible type.
void check_shape(const json& value, const json& schema, const std::string& path) {
  if (value.is_null()) throw ConfigError(path + ": null is not allowed");
  if (schema.is_object()) {
    if (!value.is_object()) {
      throw ConfigError(path + ": expected object, got " + type_name(value));
    }
    for (const auto& [key, sub] : value.items()) {
      const std::string p = path.empty() ? key : path + "." + key;
      if (!schema.contains(key)) throw ConfigError(p + ": unknown key");
      check_shape(sub, schema.at(key), p);
    }
    return;
  }
  if (schema.is_array()) {
    if (!value.is_array()) throw ConfigError(path + ": expected array, got " + type_name(value));
    if (value.size() != schema.size()) {
      throw ConfigError(path + ": expected " + std::to_string(schema.size()) + " entries, got " +
                        std::to_string(value.size()));
    }
    for (std::size_t i = 0; i < value.size(); ++i) {
      check_shape(value[i], schema[i], path + "[" + std::to_string(i) + "]");
    }
    return;
  }
  const bool ok = schema.is_number_integer() ? value.is_number_integer()
                  : schema.is_number()       ? value.is_number()
                  : schema.is_boolean()      ? value.is_boolean()
                                             : value.is_string();
  if (!ok) {
    throw ConfigError(path + ": expected " + std::string(type_name(schema)) + ", got " +
                      type_name(value));
  }
}

class Reader {
 public:
  explicit Reader(const json& root) : root_(root) {}

  double number(const std::string& path) const { return at(path).get<double>(); }

  double positive(const std::string& path) const {
    const double v = number(path);
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(path + ": must be positive");
    return v;
  }

  double nonnegative(const std::string& path) const {
    const double v = number(path);
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError(path + ": must be non-negative");
    return v;
  }

  long long integer(const std::string& path, long long min) const {
    const auto v = at(path).get<long long>();
    if (v < min) throw ConfigError(path + ": must be at least " + std::to_string(min));
    return v;
  }

  const json& at(const std::string& path) const {
    return root_.at(json::json_pointer("/" + dots_to_slashes(path)));
  }

 private:
  static std::string dots_to_slashes(std::string s) {
    for (auto& c : s) {
      if (c == '.') c = '/';
    }
    return s;
  }
  const json& root_;
};

}  // namespace

const json& default_config_json() {
  static const json defaults = json::parse(detail::kDefaultConfigJson);
  return defaults;
}

RunConfig parse_config(const json& overrides) {
  const json& defaults = default_config_json();
  check_shape(overrides, defaults, "");
  json merged = defaults;
  merged.merge_patch(overrides);
  const Reader r(merged);
  RunConfig c;

  try {
    c.nominal = nominal(r.at("design_space.nominal"));
  } catch (const DesignError& e) {
    throw ConfigError(std::string("design_space.") + e.what());
  }
  for (std::size_t i = 0; i < kDesignDims; ++i) {
    c.bounds.lower[i] = r.at("design_space.bounds.lower")[i].get<double>();
    c.bounds.upper[i] = r.at("design_space.bounds.upper")[i].get<double>();
    if (!(c.bounds.lower[i] < c.bounds.upper[i])) {
      throw ConfigError("design_space.bounds: " + std::string(kDesignFieldNames[i]) +
                        " lower bound must be below upper bound");
    }
  }

  c.sim.youngs_modulus_pa = r.positive("compliance.youngs_modulus_pa");
  c.sim.wheg_width_m = r.positive("compliance.width_m");
  c.sim.contact.damping_ratio = r.nonnegative("compliance.damping_ratio");
  c.chain_segments = static_cast<int>(r.integer("compliance.n_segments", 2));

  auto& t = c.terrain;
  t.extent.min_m = r.at("terrain.extent_m")[0].get<double>();
  t.extent.max_m = r.at("terrain.extent_m")[1].get<double>();
  if (!(t.extent.min_m < t.extent.max_m)) {
    throw ConfigError("terrain.extent_m: min must be below max");
  }
  t.flat_mu = r.positive("terrain.flat.mu");
  t.rough_seed = static_cast<std::uint64_t>(r.integer("terrain.rough.seed", 0));
  t.rough_amplitude_m = r.positive("terrain.rough.amplitude_m");
  t.rough_correlation_m = r.positive("terrain.rough.correlation_m");
  t.rough_mu = r.positive("terrain.rough.mu");
  t.stairs_step_height_m = r.positive("terrain.stairs.step_height_m");
  t.stairs_step_depth_m = r.positive("terrain.stairs.step_depth_m");
  t.stairs_mu = r.positive("terrain.stairs.mu");
  t.ramp_slope_deg = r.number("terrain.ramp.slope_deg");
  if (!(t.ramp_slope_deg > 0.0 && t.ramp_slope_deg < 90.0)) {
    throw ConfigError("terrain.ramp.slope_deg: must be within (0, 90)");
  }
  t.ramp_mu_low = r.positive("terrain.ramp.mu_low");
  t.ramp_mu_default = r.positive("terrain.ramp.mu_default");

  auto& s = c.sim;
  s.dt_s = r.positive("sim.dt_s");
  if (s.dt_s > 2e-3) throw ConfigError("sim.dt_s: must not exceed 0.002");
  s.sample_rate_hz = r.positive("sim.sample_rate_hz");
  if (s.sample_rate_hz * s.dt_s > 1.0) {
    throw ConfigError("sim.sample_rate_hz: sampling faster than the integrator step");
  }
  s.duration_s = r.positive("sim.duration_s");
  s.gravity_mps2 = r.nonnegative("sim.gravity_mps2");
  s.body_mass_kg = r.positive("sim.body_mass_kg");
  s.body_length_m = r.positive("sim.body_length_m");
  s.body_height_m = r.positive("sim.body_height_m");
  for (int h = 0; h < sim::kHubs; ++h) {
    s.hub_offsets_m[h] = r.at("sim.hub_offsets_m")[h].get<double>();
  }
  s.wheg_inertia_kgm2 = r.positive("sim.wheg_inertia_kgm2");
  s.start_x_m = r.number("sim.start_x_m");
  if (!(s.start_x_m > t.extent.min_m && s.start_x_m < t.extent.max_m)) {
    throw ConfigError("sim.start_x_m: must lie inside terrain.extent_m");
  }
  s.fall_pitch_rad = r.positive("sim.fall_pitch_rad");
  s.servo.kp_nm_per_rad = r.positive("sim.servo.kp_nm_per_rad");
  s.servo.kd_nms_per_rad = r.nonnegative("sim.servo.kd_nms_per_rad");
  s.servo.torque_limit_nm = r.positive("sim.servo.torque_limit_nm");
  s.servo.max_speed_rad_s = r.positive("sim.servo.max_speed_rad_s");
  s.contact.friction_reg_speed_mps = r.positive("sim.contact.friction_reg_speed_mps");
  s.contact.friction_stability_factor = r.nonnegative("sim.contact.friction_stability_factor");
  s.contact.body_stiffness_n_per_m = r.positive("sim.contact.body_stiffness_n_per_m");
  s.contact.body_damping_ratio = r.nonnegative("sim.contact.body_damping_ratio");
  s.settle.drop_height_m = r.nonnegative("sim.settle.drop_height_m");
  s.settle.kinetic_energy_threshold_j = r.positive("sim.settle.kinetic_energy_threshold_j");
  s.settle.quiet_window_s = r.positive("sim.settle.quiet_window_s");
  s.settle.min_time_s = r.nonnegative("sim.settle.min_time_s");
  s.settle.timeout_s = r.positive("sim.settle.timeout_s");

  c.metrics.clamp_negative_power = r.at("metrics.clamp_negative_power").get<bool>();

  auto& o = c.optimizer;
  o.budget = static_cast<int>(r.integer("optimizer.budget", 1));
  o.init_size = static_cast<int>(r.integer("optimizer.init_size", 1));
  if (o.budget < o.init_size) {
    throw ConfigError("optimizer.budget: must be at least optimizer.init_size");
  }
  o.seed = static_cast<std::uint64_t>(r.integer("optimizer.seed", 0));
  o.noise_floor = r.positive("optimizer.noise_floor");
  o.propose.candidates = static_cast<int>(r.integer("optimizer.candidates", 1));
  o.propose.refine_starts = static_cast<int>(r.integer("optimizer.refine_starts", 1));

  try {
    c.objective = opt::objective_kind_from_string(r.at("harness.objective").get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("harness.objective: ") + e.what());
  }
  c.repetitions = static_cast<int>(r.integer("harness.repetitions", 1));
  c.out_dir = r.at("harness.out_dir").get<std::string>();
  if (c.out_dir.empty()) throw ConfigError("harness.out_dir: must not be empty");
  return c;
}

RunConfig default_config() { return parse_config(json::object()); }

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  try {
    return parse_config(j);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::uint64_t terrain_seed(const TerrainSettings& s, TerrainKind kind, int repetition) {
  return kind == TerrainKind::rough ? s.rough_seed + static_cast<std::uint64_t>(repetition) : 0;
}

Terrain make_terrain(const TerrainSettings& s, TerrainKind kind, int repetition) {
  switch (kind) {
    case TerrainKind::flat:
      return make_flat(s.flat_mu, s.extent);
    case TerrainKind::rough:
      return make_rough(terrain_seed(s, kind, repetition), s.rough_amplitude_m,
                        s.rough_correlation_m, s.rough_mu, s.extent);
    case TerrainKind::stairs:
      return make_stairs(s.stairs_step_height_m, s.stairs_step_depth_m, s.stairs_mu, s.extent);
    case TerrainKind::ramp:
      return make_ramp(s.ramp_slope_deg * std::numbers::pi / 180.0, s.ramp_mu_low,
                       s.ramp_mu_default, s.extent);
  }
  throw std::invalid_argument("unknown terrain kind");
}

}  // namespace codesign
