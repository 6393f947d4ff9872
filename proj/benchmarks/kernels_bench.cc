#include <benchmark/benchmark.h>

#include <random>

#include "stop/numerics/kernels.h"

namespace {

stop::Tensor random_tensor(stop::Shape shape, std::uint64_t seed) {
  stop::Tensor t(std::move(shape));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double& v : t.values()) v = u(rng);
  return t;
}

stop::ConvGeometry geometry(const benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0));
  const auto hw = static_cast<std::size_t>(state.range(1));
  return {c, hw, hw, 2 * c, 5, 1, 2};
}

void BM_Conv2d(benchmark::State& state) {
  const stop::ConvGeometry g = geometry(state);
  const stop::Tensor x = random_tensor(g.input_shape(), 1);
  const stop::Tensor k = random_tensor(g.kernel_shape(), 2);
  stop::Tensor y(g.output_shape());
  stop::ConvScratch scratch;
  for (auto _ : state) {
    stop::conv2d(x, k, g, y, scratch);
    benchmark::DoNotOptimize(y.data());
  }
}
BENCHMARK(BM_Conv2d)->Args({1, 28})->Args({16, 14});

void BM_Conv2dAdjoint(benchmark::State& state) {
  const stop::ConvGeometry g = geometry(state);
  const stop::Tensor d = random_tensor(g.output_shape(), 3);
  const stop::Tensor k = random_tensor(g.kernel_shape(), 2);
  stop::Tensor out(g.input_shape());
  stop::ConvScratch scratch;
  for (auto _ : state) {
    stop::conv2d_adjoint_input(d, k, g, out, scratch);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_Conv2dAdjoint)->Args({1, 28})->Args({16, 14});

void BM_Conv2dWeightGrad(benchmark::State& state) {
  const stop::ConvGeometry g = geometry(state);
  const stop::Tensor x = random_tensor(g.input_shape(), 1);
  const stop::Tensor d = random_tensor(g.output_shape(), 3);
  stop::Tensor grad(g.kernel_shape());
  stop::ConvScratch scratch;
  for (auto _ : state) {
    stop::conv2d_weight_grad_accumulate(x, d, g, grad, scratch);
    benchmark::DoNotOptimize(grad.data());
  }
}
BENCHMARK(BM_Conv2dWeightGrad)->Args({1, 28})->Args({16, 14});

void BM_Matvec(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const stop::Tensor w = random_tensor({n, 4 * n}, 4);
  const stop::Tensor x = random_tensor({4 * n}, 5);
  stop::Tensor y({n});
  for (auto _ : state) {
    stop::matvec(w, x.values(), y.values());
    benchmark::DoNotOptimize(y.data());
  }
}
BENCHMARK(BM_Matvec)->Arg(64)->Arg(256);

void BM_AddOuter(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  stop::Tensor acc({n, 4 * n});
  const stop::Tensor d = random_tensor({n}, 6);
  const stop::Tensor x = random_tensor({4 * n}, 7);
  for (auto _ : state) {
    stop::add_outer(acc, d.values(), x.values());
    benchmark::DoNotOptimize(acc.data());
  }
}
BENCHMARK(BM_AddOuter)->Arg(64)->Arg(256);

void BM_AvgPool(benchmark::State& state) {
  const stop::Tensor x = random_tensor({16, 28, 28}, 8);
  stop::Tensor y({16, 14, 14});
  for (auto _ : state) {
    stop::avgpool2d(x, 2, y);
    benchmark::DoNotOptimize(y.data());
  }
}
BENCHMARK(BM_AvgPool);

}  // namespace
