#include "codesign/gp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace codesign::opt {

namespace {

constexpr double kSqrt5 = 2.23606797749978969641;
constexpr double kLog2Pi = 1.83787706640934548356;

// Box for the log-hyperparameters; the optimizer works on clamped values.
constexpr double kLogLengthMin = -4.605170185988091;  // log 0.01
constexpr double kLogLengthMax = 2.302585092994046;   // log 10
constexpr double kLogSignalMin = -2.995732273553991;  // log 0.05
constexpr double kLogSignalMax = 2.995732273553991;   // log 20
constexpr double kLogNoiseMax = 0.0;                  // log 1

GpHyper clamp_hyper(const GpHyper& h, double log_noise_floor) {
  GpHyper c = h;
  for (auto& l : c.log_lengthscales) l = std::clamp(l, kLogLengthMin, kLogLengthMax);
  c.log_signal_var = std::clamp(c.log_signal_var, kLogSignalMin, kLogSignalMax);
  c.log_noise_var = std::clamp(c.log_noise_var, log_noise_floor, kLogNoiseMax);
  return c;
}

Eigen::VectorXd pack(const GpHyper& h) {
  Eigen::VectorXd v(h.log_lengthscales.size() + 2);
  v << h.log_lengthscales, h.log_signal_var, h.log_noise_var;
  return v;
}

GpHyper unpack(const Eigen::VectorXd& v) {
  const auto d = v.size() - 2;
  return {v.head(d), v[d], v[d + 1]};
}

// Adds jitter until the Cholesky factorization succeeds.
bool factorize(Eigen::MatrixXd k, double noise, Eigen::LLT<Eigen::MatrixXd>& llt, double& jitter) {
  jitter = 0.0;
  for (int attempt = 0; attempt < 10; ++attempt) {
    Eigen::MatrixXd a = k;
    a.diagonal().array() += noise + jitter;
    llt.compute(a);
    if (llt.info() == Eigen::Success) return true;
    jitter = jitter == 0.0 ? 1e-10 : jitter * 10.0;
  }
  return false;
}

// Pairwise squared coordinate differences, reused across likelihood evaluations.
class LikelihoodEvaluator {
 public:
  LikelihoodEvaluator(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) : y_(y) {
    const auto n = X.rows();
    diffs_.reserve(static_cast<std::size_t>(X.cols()));
    for (Eigen::Index d = 0; d < X.cols(); ++d) {
      Eigen::MatrixXd m(n, n);
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
          const double delta = X(i, d) - X(j, d);
          m(i, j) = delta * delta;
        }
      }
      diffs_.push_back(std::move(m));
    }
  }

  Eigen::MatrixXd gram(const GpHyper& h) const {
    const auto n = y_.size();
    const double signal = std::exp(h.log_signal_var);
    Eigen::MatrixXd r2 = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t d = 0; d < diffs_.size(); ++d) {
      r2 += std::exp(-2.0 * h.log_lengthscales[static_cast<Eigen::Index>(d)]) * diffs_[d];
    }
    Eigen::MatrixXd k(n, n);
#pragma omp parallel for schedule(static) if (n > 64)
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < n; ++i) k(i, j) = signal * matern52(std::sqrt(r2(i, j)));
    }
    return k;
  }

  double lml(const GpHyper& h) const {
    Eigen::LLT<Eigen::MatrixXd> llt;
    double jitter = 0.0;
    if (!factorize(gram(h), std::exp(h.log_noise_var), llt, jitter)) {
      return -std::numeric_limits<double>::infinity();
    }
    const Eigen::VectorXd alpha = llt.solve(y_);
    const Eigen::MatrixXd& l = llt.matrixLLT();
    const double log_det = 2.0 * l.diagonal().array().log().sum();
    return -0.5 * y_.dot(alpha) - 0.5 * log_det - 0.5 * static_cast<double>(y_.size()) * kLog2Pi;
  }

 private:
  Eigen::VectorXd y_;
  std::vector<Eigen::MatrixXd> diffs_;
};

// Nelder-Mead minimization with a fixed evaluation budget.
template <typename F>
Eigen::VectorXd nelder_mead(F&& f, Eigen::VectorXd x0, double step, int max_evals,
                            double& best_value) {
  const auto p = x0.size();
  std::vector<Eigen::VectorXd> simplex{x0};
  for (Eigen::Index i = 0; i < p; ++i) {
    Eigen::VectorXd v = x0;
    v[i] += step;
    simplex.push_back(v);
  }
  std::vector<double> values;
  int evals = 0;
  for (const auto& v : simplex) {
    values.push_back(f(v));
    ++evals;
  }
  std::vector<std::size_t> order(simplex.size());
  while (evals < max_evals) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[order.size() - 2];
    if (std::abs(values[worst] - values[best]) < 1e-9 * (1.0 + std::abs(values[best]))) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(p);
    for (std::size_t i = 0; i < simplex.size(); ++i) {
      if (i != worst) centroid += simplex[i];
    }
    centroid /= static_cast<double>(p);

    const Eigen::VectorXd reflected = centroid + (centroid - simplex[worst]);
    const double fr = f(reflected);
    ++evals;
    if (fr < values[best]) {
      const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - simplex[worst]);
      const double fe = f(expanded);
      ++evals;
      if (fe < fr) {
        simplex[worst] = expanded;
        values[worst] = fe;
      } else {
        simplex[worst] = reflected;
        values[worst] = fr;
      }
    } else if (fr < values[second]) {
      simplex[worst] = reflected;
      values[worst] = fr;
    } else {
      const bool outside = fr < values[worst];
      const Eigen::VectorXd contracted =
          outside ? Eigen::VectorXd(centroid + 0.5 * (reflected - centroid))
                  : Eigen::VectorXd(centroid + 0.5 * (simplex[worst] - centroid));
      const double fc = f(contracted);
      ++evals;
      if (fc < std::min(fr, values[worst])) {
        simplex[worst] = contracted;
        values[worst] = fc;
      } else {
        for (std::size_t i = 0; i < simplex.size(); ++i) {
          if (i == best) continue;
          simplex[i] = simplex[best] + 0.5 * (simplex[i] - simplex[best]);
          values[i] = f(simplex[i]);
          ++evals;
        }
      }
    }
  }
  const auto it = std::min_element(values.begin(), values.end());
  best_value = *it;
  return simplex[static_cast<std::size_t>(it - values.begin())];
}

}  // namespace

double GpModel::signal_var() const { return std::exp(hyper.log_signal_var); }
double GpModel::noise_var() const { return std::exp(hyper.log_noise_var); }
double GpModel::prior_variance() const { return signal_var() * y_scale * y_scale; }

double matern52(double r) {
  const double s = kSqrt5 * r;
  return (1.0 + s + s * s / 3.0) * std::exp(-s);
}

namespace {

double scaled_distance(const Eigen::MatrixXd& X, Eigen::Index i, const double* x,
                       const Eigen::VectorXd& inv_len) {
  double r2 = 0.0;
  for (Eigen::Index d = 0; d < X.cols(); ++d) {
    const double delta = (X(i, d) - x[d]) * inv_len[d];
    r2 += delta * delta;
  }
  return std::sqrt(r2);
}

}  // namespace

Eigen::MatrixXd gram_matrix_serial(const Eigen::MatrixXd& X, const GpHyper& hyper) {
  const auto n = X.rows();
  const Eigen::VectorXd inv_len = (-hyper.log_lengthscales.array()).exp();
  const double signal = std::exp(hyper.log_signal_var);
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::RowVectorXd xi = X.row(i);
    for (Eigen::Index j = 0; j < n; ++j) {
      k(j, i) = signal * matern52(scaled_distance(X, j, xi.data(), inv_len));
    }
  }
  return k;
}

Eigen::MatrixXd gram_matrix(const Eigen::MatrixXd& X, const GpHyper& hyper) {
  const auto n = X.rows();
  const Eigen::VectorXd inv_len = (-hyper.log_lengthscales.array()).exp();
  const double signal = std::exp(hyper.log_signal_var);
  Eigen::MatrixXd k(n, n);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::RowVectorXd xi = X.row(i);
    for (Eigen::Index j = 0; j < n; ++j) {
      k(j, i) = signal * matern52(scaled_distance(X, j, xi.data(), inv_len));
    }
  }
  return k;
}

double log_marginal_likelihood(const Eigen::MatrixXd& X, const Eigen::VectorXd& y_std,
                               const GpHyper& hyper) {
  return LikelihoodEvaluator(X, y_std).lml(hyper);
}

namespace {

void require_finite(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  if (X.rows() != y.size()) throw GpError("gp: input and output counts differ");
  if (X.rows() < 1) throw GpError("gp: no training data");
  if (!X.allFinite() || !y.allFinite()) throw GpError("gp: non-finite training data");
}

GpModel condition_standardized(const Eigen::MatrixXd& X, const Eigen::VectorXd& y_std,
                               double y_mean, double y_scale, const GpHyper& hyper) {
  GpModel m;
  m.X = X;
  m.y = y_std;
  m.y_mean = y_mean;
  m.y_scale = y_scale;
  m.hyper = hyper;
  Eigen::LLT<Eigen::MatrixXd> llt;
  if (!factorize(gram_matrix(X, hyper), std::exp(hyper.log_noise_var), llt, m.jitter)) {
    throw GpError("gp: kernel matrix is not positive definite even with jitter");
  }
  m.chol = llt.matrixL();
  m.alpha = llt.solve(y_std);
  m.log_marginal_likelihood =
      -0.5 * y_std.dot(m.alpha) - m.chol.diagonal().array().log().sum() -
      0.5 * static_cast<double>(y_std.size()) * kLog2Pi;
  return m;
}

}  // namespace

GpModel gp_condition(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const GpHyper& hyper) {
  require_finite(X, y);
  return condition_standardized(X, y, 0.0, 1.0, hyper);
}

GpModel gp_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const GpFitOptions& options) {
  require_finite(X, y);
  const auto n = y.size();
  const auto d = X.cols();
  const double mean = y.mean();
  double scale = std::sqrt((y.array() - mean).square().sum() / static_cast<double>(n));
  if (!(scale > 1e-12 * (1.0 + std::abs(mean)))) scale = 1.0;
  const Eigen::VectorXd y_std = (y.array() - mean) / scale;

  const double log_floor = std::log(options.noise_floor);
  const LikelihoodEvaluator evaluator(X, y_std);
  auto objective = [&](const Eigen::VectorXd& v) {
    const double value = evaluator.lml(clamp_hyper(unpack(v), log_floor));
    return std::isfinite(value) ? -value : std::numeric_limits<double>::max();
  };

  // Grid over (shared lengthscale, signal variance, noise variance).
  const std::array<double, 3> lengths = {0.15, 0.5, 1.5};
  const std::array<double, 3> signals = {0.5, 1.0, 2.0};
  const std::array<double, 3> noises = {options.noise_floor, 1e-3, 1e-1};
  GpHyper best_hyper;
  double best = std::numeric_limits<double>::max();
  auto consider = [&](const GpHyper& h) {
    const double v = objective(pack(h));
    if (v < best) {
      best = v;
      best_hyper = h;
    }
  };
  for (double l : lengths) {
    for (double s : signals) {
      for (double nz : noises) {
        consider({Eigen::VectorXd::Constant(d, std::log(l)), std::log(s),
                  std::log(std::max(nz, options.noise_floor))});
      }
    }
  }
  if (options.warm_start && options.warm_start->log_lengthscales.size() == d) {
    consider(*options.warm_start);
  }

  double refined_value = best;
  const Eigen::VectorXd refined =
      nelder_mead(objective, pack(best_hyper), 0.5, options.max_refine_evaluations, refined_value);
  if (refined_value < best) best_hyper = unpack(refined);
  best_hyper = clamp_hyper(best_hyper, log_floor);

  return condition_standardized(X, y_std, mean, scale, best_hyper);
}

Posterior gp_posterior(const GpModel& m, std::span<const double> x) {
  if (static_cast<Eigen::Index>(x.size()) != m.X.cols()) {
    throw GpError("gp_posterior: query has wrong dimension");
  }
  const auto n = m.X.rows();
  const Eigen::VectorXd inv_len = (-m.hyper.log_lengthscales.array()).exp();
  const double signal = m.signal_var();
  Eigen::VectorXd k(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k[i] = signal * matern52(scaled_distance(m.X, i, x.data(), inv_len));
  }
  const double mean_std = k.dot(m.alpha);
  const Eigen::VectorXd v = m.chol.triangularView<Eigen::Lower>().solve(k);
  const double var_std = std::max(0.0, signal - v.squaredNorm());
  return {m.y_mean + m.y_scale * mean_std, m.y_scale * m.y_scale * var_std};
}

double expected_improvement(double mean, double variance, double best_so_far) {
  const double gain = mean - best_so_far;
  const double sigma = std::sqrt(std::max(variance, 0.0));
  if (sigma <= 0.0) return std::max(gain, 0.0);
  const double z = gain / sigma;
  const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  return std::max(0.0, gain * cdf + sigma * pdf);
}

std::vector<double> score_candidates_serial(const GpModel& model, const Eigen::MatrixXd& candidates,
                                            double best_so_far) {
  std::vector<double> ei(static_cast<std::size_t>(candidates.rows()));
  for (Eigen::Index i = 0; i < candidates.rows(); ++i) {
    const Eigen::RowVectorXd x = candidates.row(i);
    const auto post = gp_posterior(model, {x.data(), static_cast<std::size_t>(x.size())});
    ei[static_cast<std::size_t>(i)] = expected_improvement(post.mean, post.variance, best_so_far);
  }
  return ei;
}

std::vector<double> score_candidates(const GpModel& model, const Eigen::MatrixXd& candidates,
                                     double best_so_far) {
  std::vector<double> ei(static_cast<std::size_t>(candidates.rows()));
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < candidates.rows(); ++i) {
    const Eigen::RowVectorXd x = candidates.row(i);
    const auto post = gp_posterior(model, {x.data(), static_cast<std::size_t>(x.size())});
    ei[static_cast<std::size_t>(i)] = expected_improvement(post.mean, post.variance, best_so_far);
  }
  return ei;
}

}  // namespace codesign::opt
