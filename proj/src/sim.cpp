#include "codesign/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "codesign/compliance.hpp"
#include "codesign/gait.hpp"

namespace codesign::sim {

namespace {

struct Vec {
  double x = 0.0;
  double z = 0.0;
};

Vec operator+(Vec a, Vec b) { return {a.x + b.x, a.z + b.z}; }
Vec operator-(Vec a, Vec b) { return {a.x - b.x, a.z - b.z}; }
Vec operator*(double s, Vec a) { return {s * a.x, s * a.z}; }
double dot(Vec a, Vec b) { return a.x * b.x + a.z * b.z; }
// Scalar cross product, positive counter-clockwise (x toward z).
double cross(Vec a, Vec b) { return a.x * b.z - a.z * b.x; }
// omega (CCW) cross r
Vec spin(double omega, Vec r) { return {-omega * r.z, omega * r.x}; }

struct Contact {
  double depth = 0.0;
  Vec point;
  Vec normal;
};

Vec surface_normal(const Terrain& terrain, double x) {
  const double s = terrain.slope(x);
  const double inv = 1.0 / std::sqrt(1.0 + s * s);
  return {-s * inv, inv};
}

// Depth of a point below the local terrain plane, with the plane normal.
Contact ground_contact(const Terrain& terrain, Vec p) {
  const Vec n = surface_normal(terrain, p.x);
  return {(terrain.height(p.x) - p.z) * n.z, p, n};
}

struct WhegGeometry {
  Vec hub;
  Vec center;
  Vec tip;
  Vec dir;    // hub to tip
  Vec bulge;  // side of the hub-tip diameter the arc lies on
  double radius;
};

WhegGeometry wheg_geometry(Vec body, double c, double s, double offset, double radius,
                           double wheg_angle, double pitch) {
  const double psi = wheg_angle - pitch;
  const Vec dir{-std::sin(psi), -std::cos(psi)};
  WhegGeometry g;
  g.hub = body + Vec{c * offset, s * offset};
  g.dir = dir;
  g.bulge = {-dir.z, dir.x};
  g.center = g.hub + radius * dir;
  g.tip = g.hub + 2.0 * radius * dir;
  g.radius = radius;
  return g;
}

// Deepest penetration of the wheg arc into the terrain: the arc point
// furthest along -n, the free tip, and any stair nosing inside the arc.
Contact wheg_contact(const WhegGeometry& g, const Terrain& terrain,
                     std::vector<Eigen::Vector2d>& corner_buf) {
  Contact best = ground_contact(terrain, g.tip);
  const Vec n = surface_normal(terrain, g.center.x);
  if (dot(n, g.bulge) <= 0.0) {
    const Vec p = g.center - g.radius * n;
    const double depth = (terrain.height(p.x) - p.z) * n.z;
    if (depth > best.depth) best = {depth, p, n};
  }
  if (terrain.kind() == TerrainKind::stairs) {
    corner_buf.clear();
    terrain.corners(g.center.x - g.radius, g.center.x + g.radius, corner_buf);
    for (const auto& q : corner_buf) {
      const Vec r = Vec{q.x(), q.y()} - g.center;
      const double dist = std::sqrt(dot(r, r));
      if (dist >= g.radius || dist < 1e-12 || dot(r, g.bulge) < 0.0) continue;
      const double depth = g.radius - dist;
      if (depth > best.depth) best = {depth, {q.x(), q.y()}, (-1.0 / dist) * r};
    }
  }
  return best;
}

struct ContactLaw {
  double stiffness;
  double damping;
  double mu;
  double reg_speed;
  double stability_factor;
};

// Penalty normal force (never adhesive) plus tanh-regularized Coulomb friction.
// inv_mass is the inverse effective mass of the contact point along the tangent.
Vec contact_force(const Contact& c, Vec velocity, const ContactLaw& law, double inv_mass,
                  double dt, double* normal_out) {
  const Vec t{c.normal.z, -c.normal.x};
  const double vn = dot(velocity, c.normal);
  const double fn = std::max(0.0, law.stiffness * c.depth - law.damping * vn);
  const double friction_cap = law.mu * fn;
  const double reg =
      std::max(law.reg_speed, law.stability_factor * friction_cap * dt * inv_mass);
  const double ft = -friction_cap * std::tanh(dot(velocity, t) / reg);
  *normal_out = fn;
  return fn * c.normal + ft * t;
}

double servo_torque(const ServoParams& servo, const ServoCommand& cmd, double angle,
                    double rate) {
  const double raw = servo.kp_nm_per_rad * (cmd.angle_rad - angle) +
                     servo.kd_nms_per_rad * (cmd.rate_rad_s - rate);
  // Available torque falls linearly to zero at the no-load speed when driving.
  const double derate = std::clamp(1.0 - std::abs(rate) / servo.max_speed_rad_s, 0.0, 1.0);
  const double hi = rate > 0.0 ? servo.torque_limit_nm * derate : servo.torque_limit_nm;
  const double lo = rate < 0.0 ? -servo.torque_limit_nm * derate : -servo.torque_limit_nm;
  return std::clamp(raw, lo, hi);
}

bool finite(const SimState& s) {
  bool ok = std::isfinite(s.pose.x_m) && std::isfinite(s.pose.z_m) &&
            std::isfinite(s.pose.pitch_rad) && std::isfinite(s.velocity.x_m) &&
            std::isfinite(s.velocity.z_m) && std::isfinite(s.velocity.pitch_rad);
  for (int l = 0; l < kLegs; ++l) {
    ok = ok && std::isfinite(s.wheg_angle_rad[l]) && std::isfinite(s.wheg_rate_rad_s[l]);
  }
  return ok;
}

std::array<Vec, 5> body_points(const RobotModel& m) {
  const double hl = 0.5 * m.body_length_m;
  const double hh = 0.5 * m.body_height_m;
  return {Vec{hl, -hh}, Vec{0.0, -hh}, Vec{-hl, -hh}, Vec{hl, hh}, Vec{-hl, hh}};
}

}  // namespace

RobotModel build_robot(const Design& design, const SimConfig& config) {
  if (auto v = validate_gait(design.gait); !v.empty()) throw DesignError(v.front());
  const auto& morph = design.morph;
  if (!(morph.front_len_m > 0.0 && morph.back_len_m > 0.0 && morph.thickness_m > 0.0)) {
    throw DesignError("wheg lengths and thickness must be positive");
  }
  const auto section = compliance::BeamSection::rectangular(
      config.youngs_modulus_pa, config.wheg_width_m, morph.thickness_m);

  RobotModel m{};
  m.body_mass_kg = config.body_mass_kg;
  m.body_length_m = config.body_length_m;
  m.body_height_m = config.body_height_m;
  m.body_inertia_kgm2 = config.body_mass_kg *
                        (config.body_length_m * config.body_length_m +
                         config.body_height_m * config.body_height_m) /
                        12.0;
  m.wheg_inertia_kgm2 = config.wheg_inertia_kgm2;
  m.gravity_mps2 = config.gravity_mps2;
  m.servo = config.servo;
  m.contact = config.contact;
  m.body_stiffness_n_per_m = config.contact.body_stiffness_n_per_m;
  m.body_damping_ns_per_m = 2.0 * config.contact.body_damping_ratio *
                            std::sqrt(m.body_stiffness_n_per_m * 0.5 * m.body_mass_kg);

  const std::array<double, kHubs> radii = {
      morph.front_len_m, 0.5 * (morph.front_len_m + morph.back_len_m), morph.back_len_m};
  // Damping uses the share of body mass carried by one tripod leg.
  const double leg_mass = m.body_mass_kg / 3.0;
  for (int h = 0; h < kHubs; ++h) {
    const double k = compliance::tip_stiffness(section, radii[h]);
    m.hubs[h] = {config.hub_offsets_m[h], radii[h], k,
                 2.0 * config.contact.damping_ratio * std::sqrt(k * leg_mass)};
  }
  return m;
}

Commands clock_commands(double t, const GaitParams& g) {
  Commands cmds{};
  for (int l = 0; l < kLegs; ++l) {
    const auto c = gait::sample(t, g, gait::kTripodOfLeg[l] == gait::Tripod::B);
    cmds[l] = {c.angle_rad, c.rate_rad_s};
  }
  return cmds;
}

Commands hold_commands(const SimState& state) {
  Commands cmds{};
  for (int l = 0; l < kLegs; ++l) cmds[l] = {state.wheg_angle_rad[l], 0.0};
  return cmds;
}

SimState step(const SimState& state, const RobotModel& m, const Terrain& terrain,
              const Commands& commands, double dt, StepOutputs* outputs) {
  if (!(dt > 0.0 && dt <= 2e-3)) throw SimError("time step must lie in (0, 2e-3] s");

  thread_local std::vector<Eigen::Vector2d> corner_buf;
  StepOutputs out;

  const Vec body{state.pose.x_m, state.pose.z_m};
  const Vec body_vel{state.velocity.x_m, state.velocity.z_m};
  const double pitch = state.pose.pitch_rad;
  const double pitch_rate = state.velocity.pitch_rad;
  const double c = std::cos(pitch);
  const double s = std::sin(pitch);
  const double inv_m = 1.0 / m.body_mass_kg;
  const double inv_ib = 1.0 / m.body_inertia_kgm2;
  const double inv_iw = 1.0 / m.wheg_inertia_kgm2;

  Vec force{0.0, -m.body_mass_kg * m.gravity_mps2};
  double torque = 0.0;
  std::array<double, kLegs> wheg_accel{};

  for (int l = 0; l < kLegs; ++l) {
    const Hub& hub = m.hubs[hub_of_leg(l)];
    const double theta = state.wheg_angle_rad[l];
    const double theta_rate = state.wheg_rate_rad_s[l];
    const WhegGeometry g = wheg_geometry(body, c, s, hub.offset_m, hub.radius_m, theta, pitch);
    const double leg_spin = pitch_rate - theta_rate;

    double contact_torque = 0.0;
    const Contact ct = wheg_contact(g, terrain, corner_buf);
    if (ct.depth > 0.0) {
      const Vec hub_arm = g.hub - body;
      const Vec leg_arm = ct.point - g.hub;
      const Vec v = body_vel + spin(pitch_rate, hub_arm) + spin(leg_spin, leg_arm);
      const Vec t{ct.normal.z, -ct.normal.x};
      const double g_body = cross(hub_arm, t);
      const double g_leg = cross(leg_arm, t);
      const double inv_mass = inv_m + g_body * g_body * inv_ib + g_leg * g_leg * inv_iw;
      const ContactLaw law{hub.stiffness_n_per_m, hub.damping_ns_per_m,
                           terrain.friction(ct.point.x), m.contact.friction_reg_speed_mps,
                           m.contact.friction_stability_factor};
      const Vec f = contact_force(ct, v, law, inv_mass, dt, &out.normal_force_n[l]);
      force = force + f;
      torque += cross(hub_arm, f);
      contact_torque = cross(leg_arm, f);
      ++out.contacts;
    }

    const double tau = servo_torque(m.servo, commands[l], theta, theta_rate);
    out.torque_nm[l] = tau;
    torque += tau;
    wheg_accel[l] = (contact_torque - tau) * inv_iw;
  }

  // Body shell against ground and stair nosings.
  const ContactLaw body_law{m.body_stiffness_n_per_m, m.body_damping_ns_per_m, 0.0,
                            m.contact.friction_reg_speed_mps,
                            m.contact.friction_stability_factor};
  auto apply_body_contact = [&](const Contact& ct) {
    const Vec arm = ct.point - body;
    const Vec v = body_vel + spin(pitch_rate, arm);
    const Vec t{ct.normal.z, -ct.normal.x};
    const double g_body = cross(arm, t);
    ContactLaw law = body_law;
    law.mu = terrain.friction(ct.point.x);
    double fn = 0.0;
    const Vec f = contact_force(ct, v, law, inv_m + g_body * g_body * inv_ib, dt, &fn);
    force = force + f;
    torque += cross(arm, f);
    out.body_normal_force_n += fn;
    ++out.contacts;
  };
  for (const Vec& bp : body_points(m)) {
    const Vec p = body + Vec{c * bp.x - s * bp.z, s * bp.x + c * bp.z};
    const Contact ct = ground_contact(terrain, p);
    if (ct.depth > 0.0) apply_body_contact(ct);
  }
  if (terrain.kind() == TerrainKind::stairs) {
    const double reach = 0.5 * (m.body_length_m + m.body_height_m);
    corner_buf.clear();
    terrain.corners(body.x - reach, body.x + reach, corner_buf);
    const Vec up{-s, c};
    for (const auto& q : corner_buf) {
      const Vec r = Vec{q.x(), q.y()} - body;
      const double along = c * r.x + s * r.z;
      const double above = -s * r.x + c * r.z;
      const double hh = 0.5 * m.body_height_m;
      if (std::abs(along) > 0.5 * m.body_length_m || above <= -hh || above >= hh) continue;
      apply_body_contact({above + hh, {q.x(), q.y()}, up});
    }
  }

  SimState next = state;
  next.velocity.x_m += dt * force.x * inv_m;
  next.velocity.z_m += dt * force.z * inv_m;
  next.velocity.pitch_rad += dt * torque * inv_ib;
  for (int l = 0; l < kLegs; ++l) {
    // The wheg's absolute spin is the integrated coordinate; the joint rate follows.
    const double leg_spin = pitch_rate - state.wheg_rate_rad_s[l] + dt * wheg_accel[l];
    next.wheg_rate_rad_s[l] = next.velocity.pitch_rad - leg_spin;
    next.wheg_angle_rad[l] += dt * next.wheg_rate_rad_s[l];
    const double work = out.torque_nm[l] * next.wheg_rate_rad_s[l] * dt;
    out.signed_energy_j += work;
    out.clamped_energy_j += std::max(work, 0.0);
  }
  next.pose.x_m += dt * next.velocity.x_m;
  next.pose.z_m += dt * next.velocity.z_m;
  next.pose.pitch_rad += dt * next.velocity.pitch_rad;
  next.time_s = state.time_s + dt;

  if (!finite(next)) throw DivergedError("non-finite state at t = " + std::to_string(next.time_s), state);
  if (outputs != nullptr) *outputs = out;
  return next;
}

SimState step(const SimState& state, const RobotModel& model, const Terrain& terrain,
              const GaitParams& gait, double dt, StepOutputs* outputs) {
  return step(state, model, terrain, clock_commands(state.time_s, gait), dt, outputs);
}

double kinetic_energy(const SimState& state, const RobotModel& m) {
  const auto& v = state.velocity;
  double ke = 0.5 * m.body_mass_kg * (v.x_m * v.x_m + v.z_m * v.z_m) +
              0.5 * m.body_inertia_kgm2 * v.pitch_rad * v.pitch_rad;
  for (int l = 0; l < kLegs; ++l) {
    const double spin_rate = v.pitch_rad - state.wheg_rate_rad_s[l];
    ke += 0.5 * m.wheg_inertia_kgm2 * spin_rate * spin_rate;
  }
  return ke;
}

double ride_height(const SimState& state, const Terrain& terrain) {
  return state.pose.z_m - terrain.height(state.pose.x_m);
}

SimState settle(const RobotModel& m, const Terrain& terrain, const GaitParams& gait,
                const SimConfig& config) {
  SimState state;
  state.pose.x_m = config.start_x_m;
  const Commands hold = [&] {
    Commands cmds = clock_commands(0.0, gait);
    for (auto& cmd : cmds) cmd.rate_rad_s = 0.0;
    return cmds;
  }();
  for (int l = 0; l < kLegs; ++l) state.wheg_angle_rad[l] = hold[l].angle_rad;

  // Place the lowest wheg or body point drop_height above the surface.
  std::vector<Eigen::Vector2d> corner_buf;
  double deepest = -1e9;
  for (int l = 0; l < kLegs; ++l) {
    const Hub& hub = m.hubs[hub_of_leg(l)];
    const WhegGeometry g = wheg_geometry({state.pose.x_m, 0.0}, 1.0, 0.0, hub.offset_m,
                                         hub.radius_m, state.wheg_angle_rad[l], 0.0);
    deepest = std::max(deepest, terrain.height(g.tip.x) - g.tip.z);
    if (g.bulge.z <= 0.0) {
      const Vec low = g.center - Vec{0.0, g.radius};
      deepest = std::max(deepest, terrain.height(low.x) - low.z);
    }
  }
  for (const Vec& bp : body_points(m)) {
    const Vec p{state.pose.x_m + bp.x, bp.z};
    deepest = std::max(deepest, terrain.height(p.x) - p.z);
  }
  state.pose.z_m = deepest + config.settle.drop_height_m;

  const double dt = config.dt_s;
  double quiet = 0.0;
  while (true) {
    state = step(state, m, terrain, hold, dt);
    if (kinetic_energy(state, m) < config.settle.kinetic_energy_threshold_j) {
      quiet += dt;
    } else {
      quiet = 0.0;
    }
    if (state.time_s >= config.settle.min_time_s && quiet >= config.settle.quiet_window_s) break;
    if (state.time_s > config.settle.timeout_s) {
      throw SettleError("robot did not come to rest within " +
                        std::to_string(config.settle.timeout_s) + " s");
    }
  }
  state.time_s = 0.0;
  return state;
}

const char* to_string(TrialOutcome outcome) {
  switch (outcome) {
    case TrialOutcome::completed: return "completed";
    case TrialOutcome::fell: return "fell";
    case TrialOutcome::diverged: return "diverged";
  }
  return "unknown";
}

double TrialResult::total_clamped_energy_j() const {
  double e = 0.0;
  for (const auto& s : samples) e += s.clamped_energy_j;
  return e;
}

double TrialResult::total_signed_energy_j() const {
  double e = 0.0;
  for (const auto& s : samples) e += s.signed_energy_j;
  return e;
}

TrialResult run_trial(const Design& design, const Terrain& terrain, const SimConfig& config) {
  const RobotModel model = build_robot(design, config);
  TrialResult result;
  result.design = design;
  result.terrain = terrain.kind();
  result.dt_s = config.dt_s;

  SimState state;
  try {
    state = settle(model, terrain, design.gait, config);
  } catch (const SimError&) {
    result.outcome = TrialOutcome::diverged;
    return result;
  }

  const auto steps = static_cast<long>(std::llround(config.duration_s / config.dt_s));
  const long per_sample =
      std::max(1L, static_cast<long>(std::llround(1.0 / (config.sample_rate_hz * config.dt_s))));
  result.samples.reserve(static_cast<std::size_t>(steps / per_sample + 2));

  TrialSample sample;
  sample.state = state;
  sample.rate_rad_s = state.wheg_rate_rad_s;
  result.samples.push_back(sample);

  sample = {};
  StepOutputs outputs;
  for (long k = 1; k <= steps; ++k) {
    try {
      // Time is derived from the step index so long runs do not accumulate drift.
      state.time_s = static_cast<double>(k - 1) * config.dt_s;
      state = step(state, model, terrain, design.gait, config.dt_s, &outputs);
    } catch (const DivergedError& e) {
      result.outcome = TrialOutcome::diverged;
      result.duration_s = e.last_good_state.time_s;
      return result;
    }
    sample.clamped_energy_j += outputs.clamped_energy_j;
    sample.signed_energy_j += outputs.signed_energy_j;
    if (std::abs(state.pose.pitch_rad) > config.fall_pitch_rad) {
      result.outcome = TrialOutcome::fell;
      result.duration_s = state.time_s;
      return result;
    }
    if (k % per_sample == 0 || k == steps) {
      sample.state = state;
      sample.torque_nm = outputs.torque_nm;
      sample.rate_rad_s = state.wheg_rate_rad_s;
      sample.normal_force_n = outputs.normal_force_n;
      result.samples.push_back(sample);
      sample = {};
    }
  }
  result.duration_s = static_cast<double>(steps) * config.dt_s;
  return result;
}

void write_trial_log(std::ostream& out, const TrialResult& trial) {
  out << "t,x,z,pitch";
  for (int l = 0; l < kLegs; ++l) out << ",tau" << l;
  for (int l = 0; l < kLegs; ++l) out << ",omega" << l;
  out << '\n';
  char buf[32];
  auto put = [&](double v, char sep) {
    std::snprintf(buf, sizeof buf, "%.10g", v);
    out << buf << sep;
  };
  for (const auto& s : trial.samples) {
    put(s.state.time_s, ',');
    put(s.state.pose.x_m, ',');
    put(s.state.pose.z_m, ',');
    put(s.state.pose.pitch_rad, ',');
    for (int l = 0; l < kLegs; ++l) put(s.torque_nm[l], ',');
    for (int l = 0; l < kLegs; ++l) put(s.rate_rad_s[l], l + 1 < kLegs ? ',' : '\n');
  }
}

}  // namespace codesign::sim
