#include <benchmark/benchmark.h>

#include <random>

#include "stop/learn/learner.h"
#include "stop/oracle/oracle.h"
#include "stop/topology/network.h"

namespace {

struct Fixture {
  stop::NetworkSpec spec;
  stop::NetworkParams params;
  stop::Sample sample;

  Fixture(const char* arch, stop::Shape input, int steps) {
    spec = stop::parse_architecture(arch, input, 10);
    spec.time_steps = steps;
    params = stop::init_params(spec, 1);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    stop::Tensor frame(spec.input_shape);
    for (double& v : frame.values()) v = u(rng);
    sample.frames.assign(static_cast<std::size_t>(steps), frame);
    sample.label = 3;
    sample.num_classes = 10;
  }
};

void BM_StopLearnMnistNet(benchmark::State& state) {
  const Fixture f("16C5-P2-32C5-P2-256-10", {1, 28, 28},
                  static_cast<int>(state.range(0)));
  stop::StopLearner learner(f.spec);
  stop::GradAccumulator acc(f.spec);
  for (auto _ : state) {
    learner.learn(f.params, f.sample, stop::SynergyMode::kWTL,
                  stop::LossKind::kCrossEntropy, acc);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_StopLearnMnistNet)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_StopLearnDense(benchmark::State& state) {
  const Fixture f("100-100-100-10", {100}, static_cast<int>(state.range(0)));
  stop::StopLearner learner(f.spec);
  stop::GradAccumulator acc(f.spec);
  for (auto _ : state) {
    learner.learn(f.params, f.sample, stop::SynergyMode::kWTL,
                  stop::LossKind::kCrossEntropy, acc);
  }
}
BENCHMARK(BM_StopLearnDense)->Arg(2)->Arg(6)->Arg(20);

void BM_StbpDense(benchmark::State& state) {
  const Fixture f("100-100-100-10", {100}, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(stop::oracle::unrolled_stbp(
        f.spec, f.params, f.sample, stop::LossKind::kCrossEntropy, true,
        stop::SpikeMode::kHard));
  }
}
BENCHMARK(BM_StbpDense)->Arg(2)->Arg(6)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_ForwardMnistNet(benchmark::State& state) {
  const Fixture f("16C5-P2-32C5-P2-256-10", {1, 28, 28}, 6);
  stop::ForwardScratch scratch;
  for (auto _ : state) {
    stop::NetworkState states = stop::reset_network(f.spec);
    for (const stop::Tensor& frame : f.sample.frames) {
      benchmark::DoNotOptimize(stop::forward_timestep(
          f.spec, f.params, states, frame, stop::SpikeMode::kHard, scratch));
    }
  }
}
BENCHMARK(BM_ForwardMnistNet)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
