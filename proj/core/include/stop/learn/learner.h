#pragma once

#include <cstddef>
#include <vector>

#include "stop/data/sample.h"
#include "stop/learn/rule.h"
#include "stop/topology/network.h"

namespace stop {

struct LearnerOptions {
  SpikeMode spike_mode = SpikeMode::kHard;
  // Coefficient of the direct theta -> s term in the threshold gradient.
  // Only the gradient checker's self-test changes it.
  double threshold_bypass = -1.0;
};

// Instrumentation for the structural checks: how many neuron-error
// evaluations ran, over how many time-steps.
struct LearnStats {
  std::size_t output_error_evaluations = 0;
  std::size_t hidden_error_evaluations = 0;
  std::size_t time_steps = 0;
};

// Tensors a learner or oracle keeps alive between calls.
struct MemoryAudit {
  std::size_t tensors = 0;
  std::size_t values = 0;
};

struct SampleOutcome {
  double loss = 0.0;  // E* summed over time-steps
  std::size_t prediction = 0;
};

// Streaming forward-in-time learner. Per time-step it runs the spatial
// forward sweep while updating every trace, then one spatial backward sweep
// that turns each layer's instantaneous error into gradient contributions.
// Only the current step's states, traces and errors are held, so memory does
// not grow with T.
//
// For hidden layers this drops the paths through downstream membrane history;
// the result is exact for the output layer (with the reset path detached) and
// for T = 1.
class StopLearner {
 public:
  explicit StopLearner(const NetworkSpec& spec, LearnerOptions options = {});

  // Adds this sample's gradients into `acc` and bumps its counters.
  SampleOutcome learn(const NetworkParams& params, const Sample& sample,
                      SynergyMode mode, LossKind loss, GradAccumulator& acc);

  const LearnStats& stats() const { return stats_; }
  void reset_stats() { stats_ = {}; }
  MemoryAudit retained() const;
  const std::vector<LayerTraces>& traces() const { return traces_; }

 private:
  void reset(SynergyMode mode);

  NetworkSpec spec_;
  LearnerOptions options_;
  std::size_t lowest_spiking_ = 0;
  NetworkState states_;
  std::vector<LayerTraces> traces_;
  std::vector<Tensor> deltas_;
  std::vector<Tensor> spike_errors_;
  Tensor target_;
  std::vector<double> counts_;
  ForwardScratch forward_;
  ConvScratch conv_;
  LearnStats stats_;
};

GradAccumulator learn_sample(const NetworkSpec& spec,
                             const NetworkParams& params, const Sample& sample,
                             SynergyMode mode, LossKind loss,
                             LearnerOptions options = {});

}  // namespace stop
