#include "codesign/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>

#include "codesign/sobol.hpp"

namespace codesign::opt {

namespace {

double ei_at(const GpModel& model, const std::vector<double>& x, double best_so_far) {
  const auto post = gp_posterior(model, x);
  return expected_improvement(post.mean, post.variance, best_so_far);
}

// Coordinate search: try +-step along each axis, halve the step after a sweep
// without progress.
std::vector<double> refine(const GpModel& model, std::vector<double> x, double& value,
                           double best_so_far, const ProposeOptions& options) {
  double step = options.initial_step;
  for (int sweep = 0; sweep < options.refine_sweeps; ++sweep) {
    bool moved = false;
    for (std::size_t d = 0; d < x.size(); ++d) {
      for (double dir : {1.0, -1.0}) {
        std::vector<double> trial = x;
        trial[d] = std::clamp(trial[d] + dir * step, 0.0, 1.0);
        if (trial[d] == x[d]) continue;
        const double v = ei_at(model, trial, best_so_far);
        if (v > value) {
          value = v;
          x = std::move(trial);
          moved = true;
          break;
        }
      }
    }
    if (!moved) step *= 0.5;
  }
  return x;
}

Eigen::MatrixXd to_matrix(const std::vector<Evaluation>& evals, int dims) {
  Eigen::MatrixXd X(static_cast<Eigen::Index>(evals.size()), dims);
  for (std::size_t i = 0; i < evals.size(); ++i) {
    for (int d = 0; d < dims; ++d) X(static_cast<Eigen::Index>(i), d) = evals[i].unit[d];
  }
  return X;
}

void record(History& h, std::vector<double> x, double value) {
  if (!std::isfinite(value)) throw OptimizerError("objective returned a non-finite value");
  Evaluation e;
  e.iter = static_cast<int>(h.evaluations.size());
  e.unit = std::move(x);
  e.value = value;
  e.incumbent = h.evaluations.empty() ? value : std::max(h.evaluations.back().incumbent, value);
  h.evaluations.push_back(std::move(e));
}

}  // namespace

Proposal propose_next(const GpModel& model, double best_so_far, Rng& rng,
                      const ProposeOptions& options) {
  const int dims = model.dims();
  const int n = std::max(1, options.candidates);
  Eigen::MatrixXd pool(n, dims);
  for (int i = 0; i < n; ++i) {
    for (int d = 0; d < dims; ++d) pool(i, d) = uniform01(rng);
  }
  const std::vector<double> ei = score_candidates(model, pool, best_so_far);

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  const int starts = std::clamp(options.refine_starts, 1, n);
  std::partial_sort(order.begin(), order.begin() + starts, order.end(), [&](int a, int b) {
    return ei[a] > ei[b] || (ei[a] == ei[b] && a < b);
  });

  Proposal best;
  best.pool_max_ei = ei[order[0]];
  best.ei = -1.0;
  for (int s = 0; s < starts; ++s) {
    const int idx = order[static_cast<std::size_t>(s)];
    std::vector<double> x(static_cast<std::size_t>(dims));
    for (int d = 0; d < dims; ++d) x[d] = pool(idx, d);
    double value = ei[idx];
    x = refine(model, std::move(x), value, best_so_far, options);
    if (value > best.ei) {
      best.ei = value;
      best.x = std::move(x);
    }
  }
  return best;
}

const Evaluation& History::best() const {
  if (evaluations.empty()) throw OptimizerError("empty history");
  return *std::max_element(evaluations.begin(), evaluations.end(),
                           [](const Evaluation& a, const Evaluation& b) { return a.value < b.value; });
}

History maximize(const UnitObjective& f, int dims, const OptOptions& options) {
  if (dims < 1) throw OptimizerError("dimension must be positive");
  if (options.init_size < 1) throw OptimizerError("initial design must have at least one point");
  if (options.budget < options.init_size) {
    throw OptimizerError("budget " + std::to_string(options.budget) +
                         " is smaller than the initial design size " +
                         std::to_string(options.init_size));
  }
  History h;
  h.seed = options.seed;
  for (auto& x : sobol_init(options.init_size, dims, options.seed)) {
    const double v = f(x);
    record(h, std::move(x), v);
  }

  Rng rng(options.seed ^ 0x5DEECE66DULL);
  GpFitOptions fit;
  fit.noise_floor = options.noise_floor;
  while (static_cast<int>(h.evaluations.size()) < options.budget) {
    const Eigen::MatrixXd X = to_matrix(h.evaluations, dims);
    Eigen::VectorXd y(X.rows());
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = h.evaluations[i].value;
    const GpModel model = gp_fit(X, y, fit);
    fit.warm_start = model.hyper;
    Proposal p = propose_next(model, h.evaluations.back().incumbent, rng, options.propose);
    const double v = f(p.x);
    record(h, std::move(p.x), v);
  }
  return h;
}

History random_search(const UnitObjective& f, int dims, int budget, std::uint64_t seed) {
  if (dims < 1 || budget < 1) throw OptimizerError("random search needs dims and budget >= 1");
  History h;
  h.seed = seed;
  Rng rng(seed);
  for (int i = 0; i < budget; ++i) {
    std::vector<double> x(static_cast<std::size_t>(dims));
    for (auto& c : x) c = uniform01(rng);
    const double v = f(x);
    record(h, std::move(x), v);
  }
  return h;
}

const char* to_string(ObjectiveKind kind) {
  return kind == ObjectiveKind::efficiency ? "efficiency" : "speed";
}

ObjectiveKind objective_kind_from_string(const std::string& name) {
  if (name == "efficiency") return ObjectiveKind::efficiency;
  if (name == "speed") return ObjectiveKind::speed;
  throw std::invalid_argument("unknown objective '" + name + "' (expected efficiency or speed)");
}

double score(const metrics::ObjectiveValue& value, ObjectiveKind kind) {
  return kind == ObjectiveKind::efficiency ? value.efficiency_m_per_j : value.speed_m_per_s;
}

const DesignTrial& OptHistory::best() const {
  if (trials.empty()) throw OptimizerError("empty history");
  // First trial attaining the maximum, so ties resolve to the earliest.
  const DesignTrial* best = &trials.front();
  for (const auto& t : trials) {
    if (t.score > best->score) best = &t;
  }
  return *best;
}

OptHistory optimize(const DesignObjective& objective, const Bounds& bounds,
                    const OptOptions& options, ObjectiveKind kind) {
  OptHistory out;
  out.seed = options.seed;
  out.objective = kind;
  auto wrapped = [&](std::span<const double> unit) {
    DesignTrial t;
    t.iter = static_cast<int>(out.trials.size());
    t.design = from_unit(unit, bounds);
    try {
      t.value = objective(t.design);
    } catch (const std::exception&) {
      t.value = metrics::worst_case();
    }
    t.score = score(t.value, kind);
    if (!std::isfinite(t.score)) {
      t.value = metrics::worst_case();
      t.score = score(t.value, kind);
    }
    t.incumbent = out.trials.empty() ? t.score : std::max(out.trials.back().incumbent, t.score);
    out.trials.push_back(t);
    return t.score;
  };
  maximize(wrapped, static_cast<int>(kDesignDims), options);
  return out;
}

}  // namespace codesign::opt
