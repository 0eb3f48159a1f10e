#pragma once

#include <array>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace codesign {

inline constexpr std::size_t kDesignDims = 7;

using DesignVector = std::array<double, kDesignDims>;

// Field names in serialization order. This ordering is part of every file
// format the toolkit writes (design records, trial-log columns).
inline constexpr std::array<const char*, kDesignDims> kDesignFieldNames = {
    "period_s",    "slow_fraction", "slow_start_rad", "slow_end_rad",
    "front_len_m", "back_len_m",    "thickness_m"};

/// Open-loop clock shared by both tripods.
struct GaitParams {
  double period_s = 1.0;
  double slow_fraction = 0.5;  // fraction of the period spent in the slow phase
  double slow_start_rad = -0.5;
  double slow_end_rad = 0.5;

  double slow_arc() const { return slow_end_rad - slow_start_rad; }

  bool operator==(const GaitParams&) const = default;
};

/// Bilaterally symmetric wheg morphology.
struct MorphParams {
  double front_len_m = 0.03;  // front wheg radius
  double back_len_m = 0.03;   // back wheg radius
  double thickness_m = 0.0025;

  bool operator==(const MorphParams&) const = default;
};

struct Design {
  GaitParams gait;
  MorphParams morph;

  DesignVector to_vector() const;
  static Design from_vector(const DesignVector& v);

  bool operator==(const Design&) const = default;
};

struct Bounds {
  DesignVector lower{};
  DesignVector upper{};

  static Bounds defaults();
};

class DesignError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Returns every violated invariant; empty iff the design is valid.
std::vector<std::string> validate(const Design& design, const Bounds& bounds);

/// Invariants of the gait clock alone (no bounds).
std::vector<std::string> validate_gait(const GaitParams& gait);

/// Maps a design into [0,1]^7. Throws DesignError naming the first parameter
/// outside its bound interval.
DesignVector to_unit(const Design& design, const Bounds& bounds);

/// Inverse of to_unit. Throws DesignError if any component is outside [0,1].
Design from_unit(std::span<const double> unit, const Bounds& bounds);

/// Baseline platform read from a config section holding all seven named
/// fields. Throws DesignError listing missing fields, or the violated
/// invariants when the values are not a valid design.
Design nominal(const nlohmann::json& section);

nlohmann::ordered_json to_json(const Design& design);
Design design_from_json(const nlohmann::json& j);

}  // namespace codesign
