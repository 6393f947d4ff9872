#pragma once

#include <cstddef>
#include <vector>

#include "stop/learn/rule.h"
#include "stop/numerics/tensor.h"
#include "stop/topology/network.h"

namespace stop {

// eta = eta0 / 2 * (1 + cos(pi e / E)). Throws ParameterError unless
// 0 <= e < E.
double cosine_lr(double initial, std::size_t epoch, std::size_t total);

LearningRates scheduled_rates(const LearningRates& initial, std::size_t epoch,
                              std::size_t total);

struct OptimizerState {
  std::vector<Tensor> velocity;  // weight-shaped, one per layer
  // Only used when momentum also drives thresholds and leakage.
  std::vector<Tensor> threshold_velocity;
  std::vector<double> leakage_velocity;
  std::size_t epoch = 0;  // completed epochs

  static OptimizerState zeros(const NetworkParams& params);
  friend bool operator==(const OptimizerState&,
                         const OptimizerState&) = default;
};

struct StepOptions {
  LearningRates rates;
  double momentum = 0.9;
  bool momentum_all = false;
  SynergyMode mode = SynergyMode::kWTL;
  UpdateOptions update;
};

// One optimizer step from a batch accumulator:
//   v <- mu v + (dW / B + lambda w);  w <- w - eta_w v
// Thresholds and leakage take the plain truncated steps of
// apply_threshold_leakage_updates unless momentum_all is set, in which case
// their averaged steps pass through a velocity before truncation.
void optimizer_step(NetworkParams& params, OptimizerState& state,
                    const NetworkSpec& spec, const GradAccumulator& acc,
                    const StepOptions& options, std::size_t batch_size);

}  // namespace stop
