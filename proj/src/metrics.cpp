#include "codesign/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace codesign::metrics {

double forward_displacement(const sim::Pose& initial, const sim::Pose& final_pose) {
  const double dx = final_pose.x_m - initial.x_m;
  const double dz = final_pose.z_m - initial.z_m;
  return std::cos(initial.pitch_rad) * dx + std::sin(initial.pitch_rad) * dz;
}

double mech_power(std::span<const double> torques_nm, std::span<const double> rates_rad_s,
                  bool clamp_negative) {
  if (torques_nm.size() != rates_rad_s.size()) {
    throw std::invalid_argument("mech_power: torque and rate vectors differ in length");
  }
  double p = 0.0;
  for (std::size_t i = 0; i < torques_nm.size(); ++i) {
    const double term = torques_nm[i] * rates_rad_s[i];
    p += clamp_negative ? std::max(term, 0.0) : term;
  }
  return p;
}

ObjectiveValue worst_case() { return {}; }

ObjectiveValue efficiency(const sim::TrialResult& trial, const MetricsConfig& config) {
  if (trial.outcome != sim::TrialOutcome::completed || trial.samples.size() < 2) {
    return worst_case();
  }
  ObjectiveValue v;
  v.displacement_m =
      forward_displacement(trial.samples.front().state.pose, trial.samples.back().state.pose);
  v.energy_j = config.clamp_negative_power ? trial.total_clamped_energy_j()
                                           : trial.total_signed_energy_j();
  if (!(v.energy_j > 0.0)) {
    throw DegenerateTrialError("trial consumed no mechanical energy");
  }
  v.avg_power_w = v.energy_j / trial.duration_s;
  v.speed_m_per_s = v.displacement_m / trial.duration_s;
  v.efficiency_m_per_j = v.speed_m_per_s / v.avg_power_w;
  v.valid = true;
  return v;
}

}  // namespace codesign::metrics
