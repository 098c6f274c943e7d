#include <benchmark/benchmark.h>

#include "opno/model.hpp"
#include "opno/training.hpp"

namespace {

using namespace opno;

Matrix input_row(int n) {
  Matrix in(1, n + 1);
  const GridSpec g = cgl_grid(n);
  for (int j = 0; j <= n; ++j) in(0, j) = std::cos(2.0 * g.nodes[j]) + 0.3 * g.nodes[j];
  return in;
}

// Default model (4 layers, width 50, 40 modes) on one sample of degree N.
void BM_ModelForward(benchmark::State& state) {
  const ModelParams p = init_params(ModelConfig{}, 0);
  const Matrix in = input_row(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(model_forward(p, in));
}
BENCHMARK(BM_ModelForward)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_ModelForwardBackward(benchmark::State& state) {
  const ModelParams p = init_params(ModelConfig{}, 0);
  const Matrix in = input_row(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    const ForwardResult f = model_forward(p, in, ForwardMode::training);
    benchmark::DoNotOptimize(model_backward(p, *f.tape, f.output));
  }
}
BENCHMARK(BM_ModelForwardBackward)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace
