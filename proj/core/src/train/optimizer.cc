#include "stop/train/optimizer.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "stop/error.h"

namespace stop {

double cosine_lr(double initial, std::size_t epoch, std::size_t total) {
  if (epoch >= total) {
    throw ParameterError("cosine_lr: epoch " + std::to_string(epoch) +
                         " outside a schedule of " + std::to_string(total));
  }
  const double phase = std::numbers::pi * static_cast<double>(epoch) /
                       static_cast<double>(total);
  return std::max(0.0, 0.5 * initial * (1.0 + std::cos(phase)));
}

LearningRates scheduled_rates(const LearningRates& initial, std::size_t epoch,
                              std::size_t total) {
  return {cosine_lr(initial.weight, epoch, total),
          cosine_lr(initial.threshold, epoch, total),
          cosine_lr(initial.leakage, epoch, total)};
}

OptimizerState OptimizerState::zeros(const NetworkParams& params) {
  OptimizerState s;
  for (const LayerParams& p : params) {
    s.velocity.push_back(Tensor::zeros_like(p.weights));
    s.threshold_velocity.push_back(Tensor::zeros_like(p.thresholds));
    s.leakage_velocity.push_back(0.0);
  }
  return s;
}

void optimizer_step(NetworkParams& params, OptimizerState& state,
                    const NetworkSpec& spec, const GradAccumulator& acc,
                    const StepOptions& options, std::size_t batch_size) {
  if (batch_size == 0) return;
  const double scale = 1.0 / static_cast<double>(batch_size);
  const double mu = options.momentum;
  const double lambda = options.update.weight_decay;
  for (std::size_t l = 0; l < params.size(); ++l) {
    Tensor& w = params[l].weights;
    Tensor& v = state.velocity[l];
    const Tensor& g = acc.layers[l].weights;
    for (std::size_t i = 0; i < w.size(); ++i) {
      v[i] = mu * v[i] + (g[i] * scale + lambda * w[i]);
      w[i] -= options.rates.weight * v[i];
    }
  }
  if (!options.momentum_all) {
    apply_threshold_leakage_updates(params, spec, acc, options.rates,
                                    options.mode, options.update, batch_size);
    return;
  }
  for (std::size_t l = 0; l < spec.layers.size(); ++l) {
    const LayerSpec& layer = spec.layers[l];
    if (!layer.is_spiking()) continue;
    LayerParams& p = params[l];
    if (learns_thresholds(options.mode)) {
      const Tensor step = threshold_step(layer, acc.layers[l], batch_size);
      Tensor& v = state.threshold_velocity[l];
      for (std::size_t c = 0; c < step.size(); ++c) {
        v[c] = mu * v[c] + step[c];
        p.thresholds[c] = std::max(options.update.threshold_floor,
                                   p.thresholds[c] - options.rates.threshold * v[c]);
      }
    }
    if (learns_leakage(options.mode)) {
      double& v = state.leakage_velocity[l];
      v = mu * v + leakage_step(layer, acc.layers[l], batch_size);
      p.leakage = std::clamp(p.leakage - options.rates.leakage * v, 0.0, 1.0);
    }
  }
}

}  // namespace stop
