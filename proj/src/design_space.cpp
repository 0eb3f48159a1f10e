#include "codesign/design_space.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace codesign {

DesignVector Design::to_vector() const {
  return {gait.period_s,     gait.slow_fraction, gait.slow_start_rad,
          gait.slow_end_rad, morph.front_len_m,  morph.back_len_m,
          morph.thickness_m};
}

Design Design::from_vector(const DesignVector& v) {
  Design d;
  d.gait = {v[0], v[1], v[2], v[3]};
  d.morph = {v[4], v[5], v[6]};
  return d;
}

Bounds Bounds::defaults() {
  return {{0.3, 0.2, -1.5, 0.0, 0.015, 0.015, 0.001},
          {3.0, 0.9, 0.0, 1.5, 0.05, 0.05, 0.005}};
}

std::vector<std::string> validate_gait(const GaitParams& gait) {
  std::vector<std::string> out;
  if (!(gait.period_s > 0.0)) out.emplace_back("period_s must be positive");
  if (!(gait.slow_fraction > 0.0 && gait.slow_fraction < 1.0))
    out.emplace_back("slow_fraction out of (0,1)");
  if (!(gait.slow_start_rad < gait.slow_end_rad))
    out.emplace_back("slow phase interval reversed");
  else if (!(gait.slow_arc() < 2.0 * std::numbers::pi))
    out.emplace_back("slow phase arc must be shorter than a full turn");
  return out;
}

namespace {

std::vector<std::string> invariant_violations(const Design& design) {
  auto out = validate_gait(design.gait);
  const auto v = design.to_vector();
  for (std::size_t i = 4; i < kDesignDims; ++i) {
    if (!(v[i] > 0.0)) out.push_back(std::string(kDesignFieldNames[i]) + " must be positive");
  }
  for (std::size_t i = 0; i < kDesignDims; ++i) {
    if (!std::isfinite(v[i])) out.push_back(std::string(kDesignFieldNames[i]) + " is not finite");
  }
  return out;
}

}  // namespace

std::vector<std::string> validate(const Design& design, const Bounds& bounds) {
  auto out = invariant_violations(design);
  const auto v = design.to_vector();
  for (std::size_t i = 0; i < kDesignDims; ++i) {
    if (v[i] < bounds.lower[i] || v[i] > bounds.upper[i]) {
      std::ostringstream msg;
      msg << kDesignFieldNames[i] << " = " << v[i] << " outside [" << bounds.lower[i] << ", "
          << bounds.upper[i] << "]";
      out.push_back(msg.str());
    }
  }
  return out;
}

DesignVector to_unit(const Design& design, const Bounds& bounds) {
  const auto v = design.to_vector();
  DesignVector u{};
  for (std::size_t i = 0; i < kDesignDims; ++i) {
    if (!(v[i] >= bounds.lower[i] && v[i] <= bounds.upper[i])) {
      throw DesignError(std::string(kDesignFieldNames[i]) + " outside its bound interval");
    }
    u[i] = (v[i] - bounds.lower[i]) / (bounds.upper[i] - bounds.lower[i]);
  }
  return u;
}

Design from_unit(std::span<const double> unit, const Bounds& bounds) {
  if (unit.size() != kDesignDims) throw DesignError("unit vector must have 7 components");
  DesignVector v{};
  for (std::size_t i = 0; i < kDesignDims; ++i) {
    if (!(unit[i] >= 0.0 && unit[i] <= 1.0)) {
      throw DesignError("unit component " + std::string(kDesignFieldNames[i]) +
                        " outside [0,1]");
    }
    // Exact at both ends; the clamp guards rounding in between.
    v[i] = std::clamp((1.0 - unit[i]) * bounds.lower[i] + unit[i] * bounds.upper[i],
                      bounds.lower[i], bounds.upper[i]);
  }
  return Design::from_vector(v);
}

Design nominal(const nlohmann::json& section) {
  if (!section.is_object()) throw DesignError("nominal: expected an object");
  std::vector<std::string> missing;
  for (const char* name : kDesignFieldNames) {
    if (!section.contains(name) || !section[name].is_number()) missing.emplace_back(name);
  }
  if (!missing.empty()) {
    std::string msg = "nominal: missing fields:";
    for (const auto& m : missing) msg += " " + m;
    throw DesignError(msg);
  }
  const Design d = design_from_json(section);
  if (auto v = invariant_violations(d); !v.empty()) {
    std::string msg = "nominal: invalid design:";
    for (const auto& m : v) msg += " [" + m + "]";
    throw DesignError(msg);
  }
  return d;
}

nlohmann::ordered_json to_json(const Design& design) {
  nlohmann::ordered_json j;
  const auto v = design.to_vector();
  for (std::size_t i = 0; i < kDesignDims; ++i) j[kDesignFieldNames[i]] = v[i];
  return j;
}

Design design_from_json(const nlohmann::json& j) {
  DesignVector v{};
  for (std::size_t i = 0; i < kDesignDims; ++i) {
    const char* name = kDesignFieldNames[i];
    if (!j.contains(name) || !j[name].is_number()) {
      throw DesignError(std::string("design record: missing numeric field ") + name);
    }
    v[i] = j[name].get<double>();
  }
  return Design::from_vector(v);
}

}  // namespace codesign
