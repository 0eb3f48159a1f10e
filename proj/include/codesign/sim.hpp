#pragma once

#include <array>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "codesign/design_space.hpp"
#include "codesign/terrain.hpp"

// Planar (sagittal) model of a six-wheg hexapod.
//
// The body is a rigid box with three hubs (front, mid, back) on its centre
// line. Each hub carries two whegs, one per tripod, so the six servos of the
// real robot map one-to-one onto the six planar whegs. Whegs are rigid
// semicircles of radius R clamped to the hub at one end; ground contact is a
// one-sided penalty spring at the deepest point of the arc with the tip
// stiffness K of the compliant wheg, plus regularized Coulomb friction.
//
// Frames: x forward, z up, pitch positive nose-up. Wheg angle 0 points the
// hub-to-tip diameter straight down; increasing angle sweeps the tip backward.
namespace codesign::sim {

inline constexpr int kLegs = 6;
inline constexpr int kHubs = 3;

inline constexpr int hub_of_leg(int leg) { return leg / 2; }

struct ServoParams {
  double kp_nm_per_rad = 1.5;
  double kd_nms_per_rad = 0.02;
  double torque_limit_nm = 0.39;
  double max_speed_rad_s = 11.9;
};

struct ContactParams {
  double damping_ratio = 0.7;
  double friction_reg_speed_mps = 1e-3;
  // The regularization speed is raised to this multiple of mu*Fn*dt/m_eff so
  // the explicit friction update stays non-oscillatory at the chosen dt.
  double friction_stability_factor = 4.0;
  double body_stiffness_n_per_m = 3000.0;
  double body_damping_ratio = 0.7;
};

struct SettleParams {
  double drop_height_m = 0.005;
  double kinetic_energy_threshold_j = 1e-5;
  double quiet_window_s = 0.1;
  double min_time_s = 0.25;
  double timeout_s = 4.0;
};

struct SimConfig {
  double dt_s = 5e-4;
  double sample_rate_hz = 200.0;
  double duration_s = 10.0;
  double gravity_mps2 = 9.81;

  double body_mass_kg = 0.4;
  double body_length_m = 0.2;
  double body_height_m = 0.04;
  std::array<double, kHubs> hub_offsets_m = {0.08, 0.0, -0.08};
  double wheg_inertia_kgm2 = 5e-4;  // wheg plus reflected servo rotor

  double youngs_modulus_pa = 2e9;
  double wheg_width_m = 0.01;

  ServoParams servo;
  ContactParams contact;
  SettleParams settle;

  double start_x_m = -0.3;
  double fall_pitch_rad = 1.2;
};

struct Hub {
  double offset_m;
  double radius_m;
  double stiffness_n_per_m;
  double damping_ns_per_m;
};

struct RobotModel {
  double body_mass_kg;
  double body_inertia_kgm2;
  double body_length_m;
  double body_height_m;
  double body_stiffness_n_per_m;
  double body_damping_ns_per_m;
  double wheg_inertia_kgm2;
  double gravity_mps2;
  std::array<Hub, kHubs> hubs;
  ServoParams servo;
  ContactParams contact;
};

struct Pose {
  double x_m = 0.0;
  double z_m = 0.0;
  double pitch_rad = 0.0;
};

struct SimState {
  Pose pose;
  Pose velocity;  // x, z and pitch rates
  std::array<double, kLegs> wheg_angle_rad{};
  std::array<double, kLegs> wheg_rate_rad_s{};
  double time_s = 0.0;
};

struct ServoCommand {
  double angle_rad;
  double rate_rad_s;
};

using Commands = std::array<ServoCommand, kLegs>;

/// Per-step quantities that are not part of the state.
struct StepOutputs {
  std::array<double, kLegs> torque_nm{};
  std::array<double, kLegs> normal_force_n{};
  double body_normal_force_n = 0.0;
  double clamped_energy_j = 0.0;  // sum over servos of max(tau*Omega, 0)*dt
  double signed_energy_j = 0.0;
  int contacts = 0;
};

class SimError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DivergedError : public SimError {
 public:
  DivergedError(const std::string& what, SimState last_good)
      : SimError(what), last_good_state(last_good) {}
  SimState last_good_state;
};

class SettleError : public SimError {
 public:
  using SimError::SimError;
};

RobotModel build_robot(const Design& design, const SimConfig& config);

Commands clock_commands(double t, const GaitParams& gait);
Commands hold_commands(const SimState& state);

/// One semi-implicit Euler step toward explicit servo commands.
SimState step(const SimState& state, const RobotModel& model, const Terrain& terrain,
              const Commands& commands, double dt, StepOutputs* outputs = nullptr);

/// One step with commands taken from the gait clock at state.time_s.
SimState step(const SimState& state, const RobotModel& model, const Terrain& terrain,
              const GaitParams& gait, double dt, StepOutputs* outputs = nullptr);

double kinetic_energy(const SimState& state, const RobotModel& model);

/// Hub-line height above the terrain directly below the body centre.
double ride_height(const SimState& state, const Terrain& terrain);

/// Drops the robot onto the terrain at config.start_x_m holding the gait's
/// t = 0 wheg angles and integrates until it comes to rest. The returned
/// state has time_s = 0.
SimState settle(const RobotModel& model, const Terrain& terrain, const GaitParams& gait,
                const SimConfig& config);

enum class TrialOutcome { completed, fell, diverged };

const char* to_string(TrialOutcome outcome);

struct TrialSample {
  SimState state;
  std::array<double, kLegs> torque_nm{};
  std::array<double, kLegs> rate_rad_s{};
  std::array<double, kLegs> normal_force_n{};
  double clamped_energy_j = 0.0;  // accumulated since the previous sample
  double signed_energy_j = 0.0;
};

struct TrialResult {
  Design design;
  TerrainKind terrain = TerrainKind::flat;
  TrialOutcome outcome = TrialOutcome::completed;
  double dt_s = 0.0;
  double duration_s = 0.0;  // simulated gait time actually run
  std::vector<TrialSample> samples;

  double total_clamped_energy_j() const;
  double total_signed_energy_j() const;
};

/// Settle, then run the gait for config.duration_s. Failures are reported
/// through the outcome flag rather than thrown; invalid designs throw
/// DesignError.
TrialResult run_trial(const Design& design, const Terrain& terrain, const SimConfig& config);

/// Per-sample rows: t,x,z,pitch,tau0..tau5,omega0..omega5.
void write_trial_log(std::ostream& out, const TrialResult& trial);

}  // namespace codesign::sim
