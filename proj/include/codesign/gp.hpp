#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

// Gaussian-process surrogate with an ARD Matern-5/2 kernel on the unit cube.
namespace codesign::opt {

struct GpHyper {
  Eigen::VectorXd log_lengthscales;
  double log_signal_var = 0.0;
  double log_noise_var = 0.0;
};

struct GpModel {
  Eigen::MatrixXd X;         // n x d training inputs
  Eigen::VectorXd y;         // standardized training outputs
  double y_mean = 0.0;
  double y_scale = 1.0;
  GpHyper hyper;
  double jitter = 0.0;
  Eigen::MatrixXd chol;      // lower Cholesky factor of K + (noise + jitter) I
  Eigen::VectorXd alpha;     // (K + noise I)^-1 y
  double log_marginal_likelihood = 0.0;

  int dims() const { return static_cast<int>(X.cols()); }
  int size() const { return static_cast<int>(X.rows()); }
  double signal_var() const;
  double noise_var() const;
  /// Prior variance of the latent function in output units.
  double prior_variance() const;
};

struct GpFitOptions {
  double noise_floor = 1e-6;  // standardized units
  int max_refine_evaluations = 200;
  // Extra multi-start candidate, e.g. the previous iteration's fit.
  std::optional<GpHyper> warm_start;
};

class GpError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

double matern52(double scaled_distance);

/// Kernel matrix without noise (serial reference).
Eigen::MatrixXd gram_matrix_serial(const Eigen::MatrixXd& X, const GpHyper& hyper);
/// Same as gram_matrix_serial, rows computed in parallel.
Eigen::MatrixXd gram_matrix(const Eigen::MatrixXd& X, const GpHyper& hyper);

/// Log marginal likelihood of standardized outputs under fixed hyperparameters.
double log_marginal_likelihood(const Eigen::MatrixXd& X, const Eigen::VectorXd& y_std,
                               const GpHyper& hyper);

/// Builds the model at fixed hyperparameters (no search).
GpModel gp_condition(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const GpHyper& hyper);

/// Standardizes y and maximizes the log marginal likelihood over
/// hyperparameters: 27-point grid, then Nelder-Mead from the best start.
GpModel gp_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
               const GpFitOptions& options = {});

struct Posterior {
  double mean;
  double variance;  // latent function, output units, >= 0
};

Posterior gp_posterior(const GpModel& model, std::span<const double> x);

/// Closed-form expected improvement for maximization.
double expected_improvement(double mean, double variance, double best_so_far);

/// EI at every candidate (rows of `candidates`). Serial reference and the
/// OpenMP kernel produce identical values.
std::vector<double> score_candidates_serial(const GpModel& model, const Eigen::MatrixXd& candidates,
                                            double best_so_far);
std::vector<double> score_candidates(const GpModel& model, const Eigen::MatrixXd& candidates,
                                     double best_so_far);

}  // namespace codesign::opt
