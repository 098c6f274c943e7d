#include <benchmark/benchmark.h>

#include <random>

#include "opno/burgers.hpp"
#include "opno/chebyshev.hpp"
#include "opno/compacting.hpp"

namespace {

using namespace opno;

std::vector<double> random_values(std::size_t n) {
  std::mt19937_64 rng(n);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

void BM_ChebForwardNaive(benchmark::State& state) {
  const PhysicalField f{random_values(state.range(0) + 1)};
  for (auto _ : state) benchmark::DoNotOptimize(cheb_forward_naive(f));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ChebForwardNaive)->RangeMultiplier(4)->Range(64, 4096)->Complexity();

void BM_ChebForwardFast(benchmark::State& state) {
  const PhysicalField f{random_values(state.range(0) + 1)};
  for (auto _ : state) benchmark::DoNotOptimize(cheb_forward(f));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ChebForwardFast)->RangeMultiplier(4)->Range(64, 4096)->Complexity();

void BM_ChebDiffRecursion(benchmark::State& state) {
  const ChebCoeffs c{random_values(state.range(0) + 1)};
  for (auto _ : state) benchmark::DoNotOptimize(cheb_diff(c));
}
BENCHMARK(BM_ChebDiffRecursion)->RangeMultiplier(4)->Range(64, 4096);

void BM_ChebDiffFft(benchmark::State& state) {
  const ChebCoeffs c{random_values(state.range(0) + 1)};
  for (auto _ : state) benchmark::DoNotOptimize(cheb_diff_fft(c));
}
BENCHMARK(BM_ChebDiffFft)->RangeMultiplier(4)->Range(64, 4096);

void BM_CompactForwardRecursive(benchmark::State& state) {
  const ChebCoeffs a{random_values(state.range(0) + 1)};
  const auto bc = BoundaryCondition::neumann();
  for (auto _ : state) benchmark::DoNotOptimize(compact_forward_recursive(a, bc));
}
BENCHMARK(BM_CompactForwardRecursive)->RangeMultiplier(4)->Range(64, 4096);

void BM_CompactForwardFast(benchmark::State& state) {
  const ChebCoeffs a{random_values(state.range(0) + 1)};
  const auto bc = BoundaryCondition::neumann();
  for (auto _ : state) benchmark::DoNotOptimize(compact_forward_fast(a, bc));
}
BENCHMARK(BM_CompactForwardFast)->RangeMultiplier(4)->Range(64, 4096);

void BM_BurgersSolve(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  BurgersProblem p;
  p.final_time = 0.05;
  std::vector<double> u0;
  for (double x : cgl_grid(n).nodes) u0.push_back(std::cos(3.14159265358979 * x));
  const BurgersSolver solver(p, n);
  for (auto _ : state) benchmark::DoNotOptimize(solver.solve(u0));
  state.counters["steps"] = solver.steps();
}
BENCHMARK(BM_BurgersSolve)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace
