#include "codesign/gait.hpp"

#include <cmath>
#include <numbers>

namespace codesign::gait {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_valid(const GaitParams& gait) {
  if (auto v = validate_gait(gait); !v.empty()) throw DesignError("invalid gait: " + v.front());
}

ClockSample evaluate(double t, const GaitParams& g, bool half_cycle_offset) {
  const double period = g.period_s;
  if (half_cycle_offset) t += 0.5 * period;
  const double cycles = std::floor(t / period);
  const double phase_t = t - cycles * period;
  const double slow_t = g.slow_fraction * period;
  const double base = cycles * kTwoPi;
  if (phase_t < slow_t) {
    const double w = slow_rate(g);
    return {g.slow_start_rad + base + w * phase_t, w};
  }
  const double w = fast_rate(g);
  return {g.slow_end_rad + base + w * (phase_t - slow_t), w};
}

}  // namespace

double slow_rate(const GaitParams& g) { return g.slow_arc() / (g.slow_fraction * g.period_s); }

double fast_rate(const GaitParams& g) {
  return (kTwoPi - g.slow_arc()) / ((1.0 - g.slow_fraction) * g.period_s);
}

ClockSample sample(double t, const GaitParams& gait, bool half_cycle_offset) {
  require_valid(gait);
  return evaluate(t, gait, half_cycle_offset);
}

double wheg_angle(double t, const GaitParams& gait, bool half_cycle_offset) {
  return sample(t, gait, half_cycle_offset).angle_rad;
}

double wheg_rate(double t, const GaitParams& gait, bool half_cycle_offset) {
  return sample(t, gait, half_cycle_offset).rate_rad_s;
}

}  // namespace codesign::gait
