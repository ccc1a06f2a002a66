#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "mocov/covariance.hpp"
#include "mocov/flow.hpp"
#include "mocov/omp.hpp"
#include "mocov/spd.hpp"
#include "mocov/tsc.hpp"

using namespace mocov;

namespace {

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Eigen::MatrixXd random_spd(std::mt19937_64& rng, int d) {
  Eigen::MatrixXd a(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) a(i, j) = uniform01(rng) - 0.5;
  Eigen::MatrixXd m = a * a.transpose() + 0.5 * Eigen::MatrixXd::Identity(d, d);
  return Eigen::MatrixXd(0.5 * (m + m.transpose()));
}

FeatureStack random_stack(std::mt19937_64& rng, int d, long n) {
  FeatureStack stack;
  stack.dim = d;
  stack.samples.reserve(n * d);
  for (long i = 0; i < n * d; ++i) stack.samples.push_back(uniform01(rng) - 0.5);
  return stack;
}

GrayFrame textured_frame(int w, int h, double phase) {
  GrayFrame f(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      f.at(x, y) = 120.0 + 80.0 * std::sin(0.4 * x + phase) * std::cos(0.3 * y);
  return f;
}

}  // namespace

static void BM_EstimateFlow64(benchmark::State& state) {
  GrayFrame prev = textured_frame(64, 64, 0.0);
  GrayFrame next = textured_frame(64, 64, 0.4);
  FlowParams params;
  params.max_iterations = static_cast<int>(state.range(0));
  params.tolerance = 0.0;  // fixed iteration count
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate_flow(prev, next, params));
  }
}
BENCHMARK(BM_EstimateFlow64)->Arg(50)->Arg(200);

static void BM_CovarianceDirect(benchmark::State& state) {
  std::mt19937_64 rng(1);
  FeatureStack stack = random_stack(rng, 19, state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(covariance_direct(stack));
  }
}
BENCHMARK(BM_CovarianceDirect)->Arg(8192)->Arg(81920);

static void BM_CovarianceIntegral(benchmark::State& state) {
  std::mt19937_64 rng(1);
  FeatureStack stack = random_stack(rng, 19, state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(covariance_integral(stack));
  }
}
BENCHMARK(BM_CovarianceIntegral)->Arg(8192)->Arg(81920);

static void BM_MatrixLog19(benchmark::State& state) {
  std::mt19937_64 rng(2);
  Eigen::MatrixXd c = random_spd(rng, 19);
  for (auto _ : state) {
    benchmark::DoNotOptimize(matrix_log(c));
  }
}
BENCHMARK(BM_MatrixLog19);

static void BM_BatchOmp(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const int l = 190, p = static_cast<int>(state.range(0));
  std::vector<LogDescriptor> descs;
  for (int j = 0; j < p; ++j) {
    LogDescriptor d;
    d.v.resize(l);
    for (int i = 0; i < l; ++i) d.v[i] = uniform01(rng) - 0.5;
    d.label = "c" + std::to_string(j % 3);
    descs.push_back(d);
  }
  VectorDictionary dict = build_dictionary(descs);
  Eigen::VectorXd y(l);
  for (int i = 0; i < l; ++i) y[i] = uniform01(rng) - 0.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(batch_omp_single(dict, y, {10, 1e-6}));
  }
}
BENCHMARK(BM_BatchOmp)->Arg(42)->Arg(128);

static void BM_MaxdetSolve(benchmark::State& state) {
  std::mt19937_64 rng(4);
  const int p = static_cast<int>(state.range(0)), d = 12;
  std::vector<WhitenedAtom> atoms;
  for (int i = 0; i < p; ++i) {
    Eigen::MatrixXd m = random_spd(rng, d);
    m /= 2.0 * m.norm();
    atoms.push_back({m, m.trace()});
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(maxdet_solve(atoms, 1e-3));
  }
}
BENCHMARK(BM_MaxdetSolve)->Arg(16)->Arg(42);

static void BM_Whiten(benchmark::State& state) {
  std::mt19937_64 rng(5);
  Eigen::MatrixXd q = random_spd(rng, 19);
  std::vector<Eigen::MatrixXd> atoms;
  for (int i = 0; i < 42; ++i) atoms.push_back(random_spd(rng, 19));
  for (auto _ : state) {
    benchmark::DoNotOptimize(whiten(q, atoms));
  }
}
BENCHMARK(BM_Whiten);

BENCHMARK_MAIN();
