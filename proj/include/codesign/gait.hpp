#pragma once

#include <array>

#include "codesign/design_space.hpp"

// Two-speed wheg clock. Angles are unwrapped, 0 rad points straight down and
// positive rotation sweeps the wheg tip backward under the hub. Each period
// starts with the slow (ground contact) phase over [slow_start, slow_end],
// followed by the fast recirculation over the rest of the turn.
namespace codesign::gait {

enum class Tripod { A, B };

// Legs: 0 front-left, 1 front-right, 2 mid-left, 3 mid-right, 4 back-left, 5 back-right.
inline constexpr std::array<Tripod, 6> kTripodOfLeg = {Tripod::A, Tripod::B, Tripod::B,
                                                       Tripod::A, Tripod::A, Tripod::B};

struct ClockSample {
  double angle_rad;
  double rate_rad_s;
};

double slow_rate(const GaitParams& gait);
double fast_rate(const GaitParams& gait);

/// Throws DesignError on an invalid gait.
double wheg_angle(double t, const GaitParams& gait, bool half_cycle_offset);
double wheg_rate(double t, const GaitParams& gait, bool half_cycle_offset);
ClockSample sample(double t, const GaitParams& gait, bool half_cycle_offset);

}  // namespace codesign::gait
