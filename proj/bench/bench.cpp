// Serial reference vs OpenMP kernels: EI scoring, Gram matrix, cross-evaluation.

#include <benchmark/benchmark.h>

#include <random>

#include "codesign/config.hpp"
#include "codesign/gp.hpp"
#include "codesign/harness.hpp"

using namespace codesign;

namespace {

Eigen::MatrixXd random_points(int n, int dims, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd X(n, dims);
  for (int i = 0; i < n; ++i) {
    for (int d = 0; d < dims; ++d) X(i, d) = u(rng);
  }
  return X;
}

opt::GpModel fitted(int n) {
  const auto X = random_points(n, 7, 1);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y[i] = std::sin(3.0 * X(i, 0)) + X(i, 1) * X(i, 2);
  return opt::gp_fit(X, y);
}

opt::GpHyper hyper() {
  return {Eigen::VectorXd::Constant(7, std::log(0.4)), 0.0, std::log(1e-6)};
}

void BM_ScoreSerial(benchmark::State& state) {
  const auto m = fitted(100);
  const auto C = random_points(static_cast<int>(state.range(0)), 7, 2);
  for (auto _ : state) benchmark::DoNotOptimize(opt::score_candidates_serial(m, C, 1.0));
}

void BM_ScoreParallel(benchmark::State& state) {
  const auto m = fitted(100);
  const auto C = random_points(static_cast<int>(state.range(0)), 7, 2);
  for (auto _ : state) benchmark::DoNotOptimize(opt::score_candidates(m, C, 1.0));
}

void BM_GramSerial(benchmark::State& state) {
  const auto X = random_points(static_cast<int>(state.range(0)), 7, 3);
  const auto h = hyper();
  for (auto _ : state) benchmark::DoNotOptimize(opt::gram_matrix_serial(X, h));
}

void BM_GramParallel(benchmark::State& state) {
  const auto X = random_points(static_cast<int>(state.range(0)), 7, 3);
  const auto h = hyper();
  for (auto _ : state) benchmark::DoNotOptimize(opt::gram_matrix(X, h));
}

std::vector<harness::DesignEntry> designs(const RunConfig& c) {
  std::vector<harness::DesignEntry> out;
  for (int i = 0; i < 4; ++i) {
    Design d = c.nominal;
    d.gait.period_s = 0.8 + 0.1 * i;
    out.push_back({"d" + std::to_string(i), "bench", d});
  }
  return out;
}

RunConfig short_trials() {
  RunConfig c = default_config();
  c.sim.duration_s = 2.0;
  c.repetitions = 1;
  return c;
}

void BM_CrossEvalSerial(benchmark::State& state) {
  const RunConfig c = short_trials();
  const auto d = designs(c);
  const std::vector<TerrainKind> t(harness::kAllTerrains.begin(), harness::kAllTerrains.end());
  for (auto _ : state) benchmark::DoNotOptimize(harness::cross_evaluate_serial(d, t, c));
}

void BM_CrossEvalParallel(benchmark::State& state) {
  const RunConfig c = short_trials();
  const auto d = designs(c);
  const std::vector<TerrainKind> t(harness::kAllTerrains.begin(), harness::kAllTerrains.end());
  for (auto _ : state) benchmark::DoNotOptimize(harness::cross_evaluate(d, t, c));
}

}  // namespace

BENCHMARK(BM_ScoreSerial)->Arg(1024)->Arg(8192);
BENCHMARK(BM_ScoreParallel)->Arg(1024)->Arg(8192);
BENCHMARK(BM_GramSerial)->Arg(100)->Arg(400);
BENCHMARK(BM_GramParallel)->Arg(100)->Arg(400);
BENCHMARK(BM_CrossEvalSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CrossEvalParallel)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
