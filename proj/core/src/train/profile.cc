#include "stop/train/profile.h"

#include <cstdio>
#include <random>

#include "stop/error.h"
#include "stop/learn/learner.h"
#include "stop/oracle/oracle.h"

namespace stop {

ProfileReport profile(std::size_t layers, std::size_t width, int time_steps,
                      std::uint64_t seed) {
  if (layers == 0 || width == 0 || time_steps < 1) {
    throw ParameterError("profile: L, N and T must be positive");
  }
  ProfileReport r;
  r.layers = layers;
  r.width = width;
  r.time_steps = time_steps;
  const auto T = static_cast<std::uint64_t>(time_steps);
  r.stbp = complexity_estimate(layers, width, T, LearningRule::kStbp);
  r.stop_w = complexity_estimate(layers, width, T, LearningRule::kStopW);
  r.stop_wtl = complexity_estimate(layers, width, T, LearningRule::kStopWtl);

  NetworkSpec spec;
  spec.input_shape = {width};
  spec.num_classes = width;
  spec.time_steps = time_steps;
  for (std::size_t l = 0; l < layers; ++l) {
    spec.layers.push_back(LayerSpec::dense(width, width));
  }
  const NetworkParams params = init_params(spec, seed);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Sample sample;
  sample.num_classes = width;
  for (int t = 0; t < time_steps; ++t) {
    Tensor frame({width});
    for (double& v : frame.values()) v = unit(rng);
    sample.frames.push_back(std::move(frame));
  }

  StopLearner learner(spec);
  GradAccumulator acc(spec);
  learner.learn(params, sample, SynergyMode::kWTL, LossKind::kCrossEntropy,
                acc);
  const MemoryAudit audit = learner.retained();
  r.stop_retained_tensors = audit.tensors;
  r.stop_retained_values = audit.values;

  const oracle::UnrolledTape tape =
      oracle::record_tape(spec, params, sample.frames, SpikeMode::kHard);
  const oracle::TapeAudit tape_audit = tape.audit();
  r.stbp_tape_steps = tape_audit.steps;
  r.stbp_tape_tensors = tape_audit.tensors;
  r.stbp_tape_values = tape_audit.values;
  return r;
}

std::string format_profile(const ProfileReport& r) {
  char buf[2048];
  const double mem_ratio = static_cast<double>(r.stbp.memory) /
                           static_cast<double>(r.stop_w.memory);
  const double mul_ratio = static_cast<double>(r.stbp.multiplies) /
                           static_cast<double>(r.stop_w.multiplies);
  std::snprintf(
      buf, sizeof buf,
      "L=%zu N=%zu T=%d\n"
      "rule        memory          multiplies\n"
      "stbp        %-15llu %llu\n"
      "stop-w      %-15llu %llu\n"
      "stop-wtl    %-15llu %llu\n"
      "memory ratio stbp/stop-w      %.4f\n"
      "multiply ratio stbp/stop-w    %.6f\n"
      "measured stop retained        %zu tensors, %zu values\n"
      "measured stbp tape            %zu steps, %zu tensors, %zu values\n",
      r.layers, r.width, r.time_steps,
      static_cast<unsigned long long>(r.stbp.memory),
      static_cast<unsigned long long>(r.stbp.multiplies),
      static_cast<unsigned long long>(r.stop_w.memory),
      static_cast<unsigned long long>(r.stop_w.multiplies),
      static_cast<unsigned long long>(r.stop_wtl.memory),
      static_cast<unsigned long long>(r.stop_wtl.multiplies), mem_ratio,
      mul_ratio, r.stop_retained_tensors, r.stop_retained_values,
      r.stbp_tape_steps, r.stbp_tape_tensors, r.stbp_tape_values);
  return buf;
}

}  // namespace stop
