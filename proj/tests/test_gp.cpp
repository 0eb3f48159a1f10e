#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <tuple>

#include "codesign/gp.hpp"
#include "codesign/sobol.hpp"

using namespace codesign::opt;

namespace {

GpHyper iso(int dims, double length, double signal, double noise) {
  return {Eigen::VectorXd::Constant(dims, std::log(length)), std::log(signal), std::log(noise)};
}

Eigen::MatrixXd random_points(int n, int dims, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd X(n, dims);
  for (int i = 0; i < n; ++i) {
    for (int d = 0; d < dims; ++d) X(i, d) = u(rng);
  }
  return X;
}

// Kernel evaluated from scratch, no shared code with the library.
double kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const GpHyper& h) {
  double r2 = 0.0;
  for (int d = 0; d < a.size(); ++d) {
    r2 += std::pow((a[d] - b[d]) / std::exp(h.log_lengthscales[d]), 2);
  }
  const double s = std::sqrt(5.0 * r2);
  return std::exp(h.log_signal_var) * (1.0 + s + s * s / 3.0) * std::exp(-s);
}

}  // namespace

TEST(Sobol, DeterministicInRangeAndBalanced) {
  const auto a = sobol_init(16, 7, 42);
  const auto b = sobol_init(16, 7, 42);
  const auto c = sobol_init(16, 7, 43);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  for (int d = 0; d < 7; ++d) {
    double mean = 0.0;
    for (const auto& p : a) {
      EXPECT_GE(p[d], 0.0);
      EXPECT_LE(p[d], 1.0);
      mean += p[d] / 16.0;
    }
    EXPECT_NEAR(mean, 0.5, 0.12);
  }
  EXPECT_THROW(sobol_init(0, 7, 1), std::invalid_argument);
}

TEST(Gram, ParallelMatchesSerial) {
  const auto X = random_points(60, 7, 1);
  GpHyper h = iso(7, 0.4, 1.3, 1e-6);
  h.log_lengthscales[2] = std::log(2.0);
  EXPECT_EQ(gram_matrix(X, h), gram_matrix_serial(X, h));
  const auto K = gram_matrix_serial(X, h);
  EXPECT_NEAR(K(3, 7), kernel(X.row(3), X.row(7), h), 1e-14);
}

TEST(Posterior, DenseSolveOracle) {
  const auto X = random_points(25, 3, 2);
  Eigen::VectorXd y(25);
  for (int i = 0; i < 25; ++i) y[i] = std::sin(3 * X(i, 0)) + X(i, 1) * X(i, 2);
  const GpHyper h = iso(3, 0.5, 1.0, 1e-3);
  const GpModel m = gp_condition(X, y, h);

  Eigen::MatrixXd A(25, 25);
  for (int i = 0; i < 25; ++i) {
    for (int j = 0; j < 25; ++j) A(i, j) = kernel(X.row(i), X.row(j), h) + (i == j ? 1e-3 : 0.0);
  }
  const auto lu = A.fullPivLu();
  const auto Q = random_points(10, 3, 3);
  for (int q = 0; q < 10; ++q) {
    Eigen::VectorXd k(25);
    for (int i = 0; i < 25; ++i) k[i] = kernel(Q.row(q), X.row(i), h);
    const double mean = k.dot(lu.solve(y));
    const double var = 1.0 - k.dot(lu.solve(k));
    const Eigen::VectorXd x = Q.row(q);
    const auto post = gp_posterior(m, {x.data(), 3});
    EXPECT_NEAR(post.mean, mean, 1e-8);
    EXPECT_NEAR(post.variance, var, 1e-8);
  }
}

TEST(Posterior, FittedModelAgreesWithDenseSolve) {
  const auto X = random_points(30, 2, 4);
  Eigen::VectorXd y(30);
  for (int i = 0; i < 30; ++i) y[i] = 5.0 + 2.0 * std::cos(4 * X(i, 0)) - X(i, 1);
  const GpModel m = gp_fit(X, y);
  const double mu = y.mean();
  const double sd = std::sqrt((y.array() - mu).square().mean());
  const GpHyper& h = m.hyper;
  const double noise = std::exp(h.log_noise_var) + m.jitter;
  Eigen::MatrixXd A(30, 30);
  for (int i = 0; i < 30; ++i) {
    for (int j = 0; j < 30; ++j) A(i, j) = kernel(X.row(i), X.row(j), h) + (i == j ? noise : 0.0);
  }
  const Eigen::VectorXd ys = (y.array() - mu) / sd;
  const Eigen::VectorXd x = Eigen::Vector2d(0.37, 0.81);
  Eigen::VectorXd k(30);
  for (int i = 0; i < 30; ++i) k[i] = kernel(x, X.row(i), h);
  const auto lu = A.fullPivLu();
  const auto post = gp_posterior(m, {x.data(), 2});
  EXPECT_NEAR(post.mean, mu + sd * k.dot(lu.solve(ys)), 1e-8);
  EXPECT_NEAR(post.variance, sd * sd * (std::exp(h.log_signal_var) - k.dot(lu.solve(k))), 1e-8);
}

TEST(Posterior, InterpolatesTrainingPoints) {
  const auto X = random_points(20, 7, 5);
  Eigen::VectorXd y(20);
  for (int i = 0; i < 20; ++i) y[i] = X.row(i).sum();
  const GpModel m = gp_fit(X, y);
  const double noise_sd = std::sqrt(m.noise_var() + m.jitter) * m.y_scale;
  for (int i = 0; i < 20; ++i) {
    const Eigen::VectorXd x = X.row(i);
    const auto post = gp_posterior(m, {x.data(), 7});
    EXPECT_NEAR(post.mean, y[i], 3.0 * noise_sd + 1e-9);
    EXPECT_LE(post.variance, (m.noise_var() + m.jitter) * m.y_scale * m.y_scale * (1 + 1e-6) + 1e-12);
  }
}

TEST(Posterior, ConstantTarget) {
  const auto X = random_points(12, 3, 6);
  const Eigen::VectorXd y = Eigen::VectorXd::Constant(12, 2.5);
  const GpModel m = gp_fit(X, y);
  for (int q = 0; q < 5; ++q) {
    const Eigen::VectorXd x = random_points(1, 3, 100 + q).row(0);
    const auto post = gp_posterior(m, {x.data(), 3});
    EXPECT_NEAR(post.mean, 2.5, 1e-9);
    EXPECT_LE(post.variance, m.prior_variance() * (1 + 1e-12));
  }
}

TEST(Posterior, SymmetricPairMidpointIsAverage) {
  Eigen::MatrixXd X(2, 1);
  X << 0.2, 0.6;
  const Eigen::VectorXd y = Eigen::Vector2d(1.0, 3.0);
  const GpModel m = gp_fit(X, y);
  const double mid = 0.4;
  EXPECT_NEAR(gp_posterior(m, {&mid, 1}).mean, 2.0, 1e-9);
}

TEST(Posterior, RevertsToPriorFarAway) {
  Eigen::MatrixXd X(3, 1);
  X << 0.0, 0.01, 0.02;
  const Eigen::VectorXd y = Eigen::Vector3d(1.0, 2.0, 0.5);
  const GpModel m = gp_condition(X, y, iso(1, 0.01, 1.0, 1e-6));
  const double far = 0.02 + 10 * 0.01 + 0.05;
  const auto post = gp_posterior(m, {&far, 1});
  EXPECT_NEAR(post.mean, 0.0, 0.01);
  EXPECT_NEAR(post.variance, 1.0, 0.01);
}

TEST(Fit, RecoversLengthscaleFromGpSamples) {
  const double truth = 0.3;
  const int dims = 2;
  std::vector<double> recovered[dims];
  for (int seed = 0; seed < 20; ++seed) {
    const auto X = random_points(64, dims, 1000 + seed);
    const GpHyper h = iso(dims, truth, 1.0, 1e-6);
    Eigen::MatrixXd K(64, 64);
    for (int i = 0; i < 64; ++i) {
      for (int j = 0; j < 64; ++j) K(i, j) = kernel(X.row(i), X.row(j), h) + (i == j ? 1e-8 : 0.0);
    }
    const Eigen::MatrixXd L = K.llt().matrixL();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01;
    Eigen::VectorXd z(64);
    for (auto& v : z) v = n01(rng);
    const GpModel m = gp_fit(X, L * z);
    for (int d = 0; d < dims; ++d) recovered[d].push_back(std::exp(m.hyper.log_lengthscales[d]));
  }
  for (auto& r : recovered) {
    std::nth_element(r.begin(), r.begin() + 10, r.end());
    EXPECT_GT(r[10], truth / 2.0);
    EXPECT_LT(r[10], truth * 2.0);
  }
}

TEST(Fit, DuplicateConflictingRowsResolvedByNoise) {
  Eigen::MatrixXd X(4, 2);
  X << 0.1, 0.1, 0.1, 0.1, 0.5, 0.5, 0.9, 0.2;
  const Eigen::VectorXd y = Eigen::Vector4d(1.0, 2.0, 0.0, 1.0);
  EXPECT_NO_THROW(gp_fit(X, y));
}

TEST(Fit, NonFiniteInputsRejected) {
  Eigen::MatrixXd X = random_points(4, 2, 7);
  Eigen::VectorXd y = Eigen::Vector4d(1.0, 2.0, std::nan(""), 1.0);
  EXPECT_THROW(gp_fit(X, y), GpError);
}

TEST(ExpectedImprovement, ClosedFormCases) {
  EXPECT_EQ(expected_improvement(1.0, 0.0, 1.0), 0.0);
  EXPECT_EQ(expected_improvement(1.5, 0.0, 1.0), 0.5);
  EXPECT_NEAR(expected_improvement(0.0, 1.0, 0.0), 1.0 / std::sqrt(2.0 * std::numbers::pi), 1e-15);
  EXPECT_NEAR(expected_improvement(0.0, 1.0, 0.0), 0.39894, 1e-5);
}

TEST(ExpectedImprovement, MonteCarloOracle) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> n01;
  for (const auto& [mu, sd, best] : {std::tuple{0.0, 1.0, 0.0}, std::tuple{0.3, 0.5, 1.0},
                                     std::tuple{-1.0, 2.0, 0.5}}) {
    const int n = 1'000'000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
      const double g = std::max(mu + sd * n01(rng) - best, 0.0);
      sum += g;
      sq += g * g;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sq / n - mean * mean) / n);
    EXPECT_NEAR(expected_improvement(mu, sd * sd, best), mean, 4.0 * se);
  }
}

TEST(ExpectedImprovement, MonotoneInSigmaBelowBest) {
  for (double mu : {-2.0, -0.5, 0.0}) {
    double prev = 0.0;
    for (double s = 0.0; s <= 3.0; s += 0.01) {
      const double ei = expected_improvement(mu, s * s, 0.0);
      EXPECT_GE(ei, prev);
      EXPECT_GE(ei, 0.0);
      prev = ei;
    }
  }
}

TEST(ScoreCandidates, ParallelMatchesSerial) {
  const auto X = random_points(40, 7, 8);
  Eigen::VectorXd y(40);
  for (int i = 0; i < 40; ++i) y[i] = std::sin(X.row(i).sum());
  const GpModel m = gp_fit(X, y);
  const auto C = random_points(500, 7, 9);
  EXPECT_EQ(score_candidates(m, C, y.maxCoeff()), score_candidates_serial(m, C, y.maxCoeff()));
}
