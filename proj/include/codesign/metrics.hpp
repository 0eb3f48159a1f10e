#pragma once

#include <span>
#include <stdexcept>

#include "codesign/sim.hpp"

namespace codesign::metrics {

struct ObjectiveValue {
  double efficiency_m_per_j = 0.0;
  double speed_m_per_s = 0.0;
  double displacement_m = 0.0;
  double avg_power_w = 0.0;
  double energy_j = 0.0;
  bool valid = false;
};

struct MetricsConfig {
  // Negative per-motor power counts as zero (servos do not regenerate).
  bool clamp_negative_power = true;
};

class DegenerateTrialError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Forward component of the initial-to-final displacement expressed in the
/// initial body frame.
double forward_displacement(const sim::Pose& initial, const sim::Pose& final_pose);

double mech_power(std::span<const double> torques_nm, std::span<const double> rates_rad_s,
                  bool clamp_negative = true);

/// Score substituted for failed trials.
ObjectiveValue worst_case();

/// Efficiency (displacement per joule) and speed of a trial. Failed trials
/// yield worst_case(); a completed trial with zero energy throws
/// DegenerateTrialError.
ObjectiveValue efficiency(const sim::TrialResult& trial, const MetricsConfig& config = {});

}  // namespace codesign::metrics
