// Timings for the solver hot paths on generated data.

#include <benchmark/benchmark.h>

#include <random>

#include "wdrmsvm/data.hpp"
#include "wdrmsvm/kernel.hpp"
#include "wdrmsvm/linear_solver.hpp"
#include "wdrmsvm/reference_solver.hpp"

namespace {

using namespace wdrmsvm;

Dataset blobs(int classes, int features, int samples) {
  GeneratorSpec spec;
  spec.classes = classes;
  spec.features = features;
  spec.samples = samples;
  spec.seed = 3;
  return generate_hypercube(spec);
}

Hyperparams params(int iterations) {
  Hyperparams hp;
  hp.epsilon = 0.05;
  hp.kappa = 0.5;
  hp.solver.iterations = iterations;
  return hp;
}

void BM_Objective(benchmark::State& state) {
  const Dataset d = blobs(4, 3, static_cast<int>(state.range(0)));
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  Matrix M(4, 3);
  for (int i = 0; i < M.size(); ++i) M.data()[i] = g(rng);
  for (auto _ : state) benchmark::DoNotOptimize(objective(2.0, M, d, 0.05, 0.5));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Objective)->Arg(200)->Arg(2000);

void BM_Project(benchmark::State& state) {
  const int C = static_cast<int>(state.range(0));
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0.0, 2.0);
  Matrix M(C, 3);
  for (int i = 0; i < M.size(); ++i) M.data()[i] = g(rng);
  for (auto _ : state) benchmark::DoNotOptimize(project(0.5, M, 1e-10));
}
BENCHMARK(BM_Project)->Arg(3)->Arg(10);

void BM_ProjectPairwiseL1(benchmark::State& state) {
  const int C = static_cast<int>(state.range(0));
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0.0, 2.0);
  Matrix M(C, 3);
  for (int i = 0; i < M.size(); ++i) M.data()[i] = g(rng);
  for (auto _ : state) benchmark::DoNotOptimize(project_pairwise_l1(0.5, M, 1e-10));
}
BENCHMARK(BM_ProjectPairwiseL1)->Arg(3)->Arg(10);

void BM_FitLinear(benchmark::State& state) {
  const Dataset d = blobs(4, 3, static_cast<int>(state.range(0)));
  const Hyperparams hp = params(1000);
  for (auto _ : state) benchmark::DoNotOptimize(fit(d, hp));
}
BENCHMARK(BM_FitLinear)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_SolveLp(benchmark::State& state) {
  const Dataset d = blobs(3, 2, static_cast<int>(state.range(0)));
  const LpModel lp = build_lp(d, params(1)).model;
  for (auto _ : state) benchmark::DoNotOptimize(solve_lp(lp));
}
BENCHMARK(BM_SolveLp)->Arg(12)->Arg(40)->Unit(benchmark::kMillisecond);

void BM_FitKernel(benchmark::State& state) {
  const Dataset d = blobs(3, 4, static_cast<int>(state.range(0)));
  const Hyperparams hp = params(300);
  for (auto _ : state) benchmark::DoNotOptimize(fit_kernel(d, hp, KernelConfig::rbf()));
}
BENCHMARK(BM_FitKernel)->Arg(105)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
