#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "codesign/design_space.hpp"
#include "codesign/gp.hpp"
#include "codesign/metrics.hpp"

// Bayesian optimization on the unit cube: Sobol initial design, then one
// expected-improvement proposal per iteration from a refitted GP.
namespace codesign::opt {

using Rng = std::mt19937_64;

/// Uniform double in [0,1) from the top 53 bits; identical on every platform.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

struct ProposeOptions {
  int candidates = 1024;
  int refine_starts = 8;
  int refine_sweeps = 8;
  double initial_step = 0.1;
};

struct Proposal {
  std::vector<double> x;
  double ei = 0.0;
  double pool_max_ei = 0.0;  // best EI among the raw random candidates
};

Proposal propose_next(const GpModel& model, double best_so_far, Rng& rng,
                      const ProposeOptions& options = {});

struct OptOptions {
  int budget = 100;
  int init_size = 16;
  std::uint64_t seed = 1;
  double noise_floor = 1e-6;
  ProposeOptions propose;
};

class OptimizerError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Evaluation {
  int iter = 0;
  std::vector<double> unit;
  double value = 0.0;
  double incumbent = 0.0;
};

struct History {
  std::uint64_t seed = 0;
  std::vector<Evaluation> evaluations;
  const Evaluation& best() const;
};

using UnitObjective = std::function<double(std::span<const double>)>;

/// Maximizes f over [0,1]^dims. f must return finite values.
History maximize(const UnitObjective& f, int dims, const OptOptions& options);

/// Uniform random sampling with the same budget, for comparison.
History random_search(const UnitObjective& f, int dims, int budget, std::uint64_t seed);

enum class ObjectiveKind { efficiency, speed };

const char* to_string(ObjectiveKind kind);
/// Throws std::invalid_argument for an unknown name.
ObjectiveKind objective_kind_from_string(const std::string& name);

double score(const metrics::ObjectiveValue& value, ObjectiveKind kind);

struct DesignTrial {
  int iter = 0;
  Design design;
  metrics::ObjectiveValue value;
  double score = 0.0;
  double incumbent = 0.0;
};

struct OptHistory {
  std::uint64_t seed = 0;
  ObjectiveKind objective = ObjectiveKind::efficiency;
  std::vector<DesignTrial> trials;
  const DesignTrial& best() const;
};

using DesignObjective = std::function<metrics::ObjectiveValue(const Design&)>;

/// Co-design loop over the design box. Exceptions thrown by the objective are
/// recorded as the worst-case value and the loop continues.
OptHistory optimize(const DesignObjective& objective, const Bounds& bounds,
                    const OptOptions& options, ObjectiveKind kind);

}  // namespace codesign::opt
