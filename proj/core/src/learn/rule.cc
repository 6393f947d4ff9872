#include "stop/learn/rule.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "stop/error.h"

namespace stop {

SynergyMode parse_synergy_mode(std::string_view name) {
  if (name == "W" || name == "w") return SynergyMode::kW;
  if (name == "WT" || name == "wt") return SynergyMode::kWT;
  if (name == "WL" || name == "wl") return SynergyMode::kWL;
  if (name == "WTL" || name == "wtl") return SynergyMode::kWTL;
  throw ParameterError("unknown synergy mode '" + std::string(name) +
                       "' (expected W, WT, WL or WTL)");
}

std::string_view to_string(SynergyMode mode) {
  switch (mode) {
    case SynergyMode::kW:
      return "W";
    case SynergyMode::kWT:
      return "WT";
    case SynergyMode::kWL:
      return "WL";
    case SynergyMode::kWTL:
      return "WTL";
  }
  return "?";
}

LossKind parse_loss(std::string_view name) {
  if (name == "ce" || name == "CE") return LossKind::kCrossEntropy;
  if (name == "mse" || name == "MSE") return LossKind::kMeanSquared;
  throw ParameterError("unknown loss '" + std::string(name) + "'");
}

std::string_view to_string(LossKind loss) {
  return loss == LossKind::kCrossEntropy ? "ce" : "mse";
}

namespace {

void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw ShapeError(std::string(what) + ": size " + std::to_string(a) +
                     " vs " + std::to_string(b));
  }
}

}  // namespace

void update_weight_traces(Tensor& traces, const Tensor& presynaptic_spikes,
                          double leakage) {
  require_same_size(traces.size(), presynaptic_spikes.size(),
                    "update_weight_traces");
  double* w = traces.data();
  const double* s = presynaptic_spikes.data();
  for (std::size_t i = 0; i < traces.size(); ++i) {
    w[i] = leakage * w[i] + s[i];
  }
}

void update_threshold_traces(Tensor& traces, const Tensor& previous_spikes,
                             double leakage) {
  require_same_size(traces.size(), previous_spikes.size(),
                    "update_threshold_traces");
  for (std::size_t j = 0; j < traces.size(); ++j) {
    traces[j] = leakage * (traces[j] - previous_spikes[j]);
  }
}

void update_leakage_traces(Tensor& traces, const Tensor& previous_potentials,
                           const Tensor& previous_spikes,
                           ThresholdView thresholds, double leakage) {
  require_same_size(traces.size(), previous_potentials.size(),
                    "update_leakage_traces");
  require_same_size(traces.size(), previous_spikes.size(),
                    "update_leakage_traces");
  require_same_size(traces.size(), thresholds.neuron_count(),
                    "update_leakage_traces");
  for (std::size_t j = 0; j < traces.size(); ++j) {
    traces[j] = leakage * traces[j] +
                (previous_potentials[j] - thresholds(j) * previous_spikes[j]);
  }
}

void check_one_hot(std::span<const double> target) {
  std::size_t ones = 0;
  for (double v : target) {
    if (v == 1.0) {
      ++ones;
    } else if (v != 0.0) {
      throw TargetError("target entries must be 0 or 1");
    }
  }
  if (ones != 1) {
    throw TargetError("target must contain exactly one 1, found " +
                      std::to_string(ones));
  }
}

void softmax(std::span<const double> x, std::span<double> out) {
  require_same_size(x.size(), out.size(), "softmax");
  const double peak = *std::max_element(x.begin(), x.end());
  double total = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    out[j] = std::exp(x[j] - peak);
    total += out[j];
  }
  for (double& v : out) v /= total;
}

double instant_loss(std::span<const double> spikes,
                    std::span<const double> target, LossKind loss) {
  require_same_size(spikes.size(), target.size(), "instant_loss");
  check_one_hot(target);
  if (loss == LossKind::kMeanSquared) {
    double e = 0.0;
    for (std::size_t j = 0; j < spikes.size(); ++j) {
      const double d = spikes[j] - target[j];
      e += d * d;
    }
    return 0.5 * e;
  }
  const double peak = *std::max_element(spikes.begin(), spikes.end());
  double total = 0.0;
  double labelled = 0.0;
  for (std::size_t j = 0; j < spikes.size(); ++j) {
    total += std::exp(spikes[j] - peak);
    labelled += target[j] * spikes[j];
  }
  return std::log(total) + peak - labelled;
}

void loss_gradient(std::span<const double> spikes,
                   std::span<const double> target, LossKind loss,
                   std::span<double> out) {
  require_same_size(spikes.size(), target.size(), "loss_gradient");
  require_same_size(spikes.size(), out.size(), "loss_gradient");
  check_one_hot(target);
  if (loss == LossKind::kCrossEntropy) {
    softmax(spikes, out);
  } else {
    std::copy(spikes.begin(), spikes.end(), out.begin());
  }
  for (std::size_t j = 0; j < out.size(); ++j) out[j] -= target[j];
}

void output_error(const Tensor& spikes, const Tensor& target,
                  const Tensor& potentials, ThresholdView thresholds,
                  LossKind loss, SurrogateKind surrogate, Tensor& delta) {
  require_same_size(spikes.size(), potentials.size(), "output_error");
  require_same_size(spikes.size(), thresholds.neuron_count(), "output_error");
  if (delta.shape() != spikes.shape()) delta = Tensor::zeros_like(spikes);
  loss_gradient(spikes.values(), target.values(), loss, delta.values());
  for (std::size_t j = 0; j < delta.size(); ++j) {
    delta[j] *= stop::surrogate(potentials[j] - thresholds(j), surrogate);
  }
}

Tensor output_error(const Tensor& spikes, const Tensor& target,
                    const Tensor& potentials, ThresholdView thresholds,
                    LossKind loss, SurrogateKind surrogate) {
  Tensor delta;
  output_error(spikes, target, potentials, thresholds, loss, surrogate, delta);
  return delta;
}

void error_to_presynaptic(const LayerSpec& layer, const LayerParams& params,
                          const Tensor& error, Tensor& out,
                          ConvScratch& scratch) {
  require_same_size(error.size(), layer.neuron_count(), "error_to_presynaptic");
  switch (layer.kind) {
    case LayerKind::kDense:
      if (out.shape() != layer.input_shape) out = Tensor(layer.input_shape);
      matvec_transposed(params.weights, error.values(), out.values());
      break;
    case LayerKind::kConv:
      conv2d_adjoint_input(error, params.weights, layer.geometry(), out,
                           scratch);
      break;
    case LayerKind::kAvgPool:
      avgpool2d_adjoint(error, layer.window, out);
      break;
    case LayerKind::kFlatten:
      out = error.reshaped(layer.input_shape);
      break;
  }
}

void hidden_error(const Tensor& spike_error, const Tensor& potentials,
                  ThresholdView thresholds, SurrogateKind surrogate,
                  Tensor& delta) {
  require_same_size(spike_error.size(), potentials.size(), "hidden_error");
  require_same_size(spike_error.size(), thresholds.neuron_count(),
                    "hidden_error");
  if (delta.shape() != potentials.shape()) delta = Tensor::zeros_like(potentials);
  for (std::size_t j = 0; j < delta.size(); ++j) {
    delta[j] = spike_error[j] *
               stop::surrogate(potentials[j] - thresholds(j), surrogate);
  }
}

Tensor hidden_error(const Tensor& upper_delta, const LayerSpec& upper,
                    const LayerParams& upper_params, const Tensor& potentials,
                    ThresholdView thresholds, SurrogateKind surrogate) {
  Tensor spike_error;
  ConvScratch scratch;
  error_to_presynaptic(upper, upper_params, upper_delta, spike_error, scratch);
  Tensor delta;
  hidden_error(spike_error.reshaped(potentials.shape()), potentials,
               thresholds, surrogate, delta);
  return delta;
}

GradAccumulator::GradAccumulator(const NetworkSpec& spec)
    : layers(zero_gradients(spec)) {}

void GradAccumulator::reset() {
  for (LayerGradients& g : layers) {
    g.weights.fill(0.0);
    g.thresholds.fill(0.0);
    g.leakages.fill(0.0);
  }
  samples = 0;
  loss = 0.0;
  correct = 0;
}

void GradAccumulator::merge(const GradAccumulator& other) {
  if (other.layers.size() != layers.size()) {
    throw ShapeError("GradAccumulator::merge: layer count mismatch");
  }
  auto add = [](Tensor& into, const Tensor& from) {
    require_same_size(into.size(), from.size(), "GradAccumulator::merge");
    for (std::size_t i = 0; i < into.size(); ++i) into[i] += from[i];
  };
  for (std::size_t l = 0; l < layers.size(); ++l) {
    add(layers[l].weights, other.layers[l].weights);
    add(layers[l].thresholds, other.layers[l].thresholds);
    add(layers[l].leakages, other.layers[l].leakages);
  }
  samples += other.samples;
  loss += other.loss;
  correct += other.correct;
}

void accumulate_gradients(LayerGradients& acc, const LayerSpec& layer,
                          const Tensor& delta, const LayerTraces& traces,
                          SynergyMode mode, ConvScratch& scratch,
                          double threshold_bypass) {
  require_same_size(delta.size(), layer.neuron_count(), "accumulate_gradients");
  require_same_size(traces.weight.size(), layer.presynaptic_count(),
                    "accumulate_gradients weight trace");
  if (layer.kind == LayerKind::kDense) {
    add_outer(acc.weights, delta.values(), traces.weight.values());
  } else if (layer.kind == LayerKind::kConv) {
    conv2d_weight_grad_accumulate(traces.weight, delta, layer.geometry(),
                                  acc.weights, scratch);
  } else {
    throw ShapeError("accumulate_gradients on a non-spiking layer");
  }
  if (learns_thresholds(mode)) {
    if (traces.threshold.size() != delta.size()) {
      throw ShapeError("accumulate_gradients: mode " +
                       std::string(to_string(mode)) +
                       " requires threshold traces");
    }
    for (std::size_t j = 0; j < delta.size(); ++j) {
      acc.thresholds[j] += delta[j] * (traces.threshold[j] + threshold_bypass);
    }
  }
  if (learns_leakage(mode)) {
    if (traces.leakage.size() != delta.size()) {
      throw ShapeError("accumulate_gradients: mode " +
                       std::string(to_string(mode)) +
                       " requires leakage traces");
    }
    for (std::size_t j = 0; j < delta.size(); ++j) {
      acc.leakages[j] += delta[j] * traces.leakage[j];
    }
  }
}

void apply_weight_updates(NetworkParams& params, const GradAccumulator& acc,
                          double rate, const UpdateOptions& options,
                          std::size_t batch_size) {
  if (batch_size == 0) return;
  const double scale = 1.0 / static_cast<double>(batch_size);
  for (std::size_t l = 0; l < params.size(); ++l) {
    Tensor& w = params[l].weights;
    const Tensor& g = acc.layers[l].weights;
    for (std::size_t i = 0; i < w.size(); ++i) {
      w[i] -= rate * (g[i] * scale + options.weight_decay * w[i]);
    }
  }
}

Tensor threshold_step(const LayerSpec& layer, const LayerGradients& grads,
                      std::size_t batch_size) {
  const double scale = 1.0 / static_cast<double>(batch_size);
  const std::size_t group = layer.threshold_group();
  Tensor step({layer.threshold_count()});
  for (std::size_t c = 0; c < step.size(); ++c) {
    double sum = 0.0;
    for (std::size_t n = c * group; n < (c + 1) * group; ++n) {
      sum += grads.thresholds[n];
    }
    step[c] = sum / static_cast<double>(group) * scale;
    if (std::isnan(step[c])) {
      throw NumericError("threshold gradient is NaN");
    }
  }
  return step;
}

double leakage_step(const LayerSpec& layer, const LayerGradients& grads,
                    std::size_t batch_size) {
  const double mean = grads.leakages.sum() /
                      static_cast<double>(layer.neuron_count()) /
                      static_cast<double>(batch_size);
  if (std::isnan(mean)) throw NumericError("leakage gradient is NaN");
  return mean;
}

void apply_threshold_leakage_updates(NetworkParams& params,
                                     const NetworkSpec& spec,
                                     const GradAccumulator& acc,
                                     const LearningRates& rates,
                                     SynergyMode mode,
                                     const UpdateOptions& options,
                                     std::size_t batch_size) {
  if (batch_size == 0) return;
  for (std::size_t l = 0; l < spec.layers.size(); ++l) {
    const LayerSpec& layer = spec.layers[l];
    if (!layer.is_spiking()) continue;
    LayerParams& p = params[l];
    const LayerGradients& g = acc.layers[l];
    if (learns_thresholds(mode)) {
      const Tensor step = threshold_step(layer, g, batch_size);
      for (std::size_t c = 0; c < step.size(); ++c) {
        p.thresholds[c] = std::max(options.threshold_floor,
                                   p.thresholds[c] - rates.threshold * step[c]);
      }
    }
    if (learns_leakage(mode)) {
      const double step = leakage_step(layer, g, batch_size);
      p.leakage = std::clamp(p.leakage - rates.leakage * step, 0.0, 1.0);
    }
  }
}

void apply_updates(NetworkParams& params, const NetworkSpec& spec,
                   const GradAccumulator& acc, const LearningRates& rates,
                   SynergyMode mode, const UpdateOptions& options,
                   std::size_t batch_size) {
  apply_weight_updates(params, acc, rates.weight, options, batch_size);
  apply_threshold_leakage_updates(params, spec, acc, rates, mode, options,
                                  batch_size);
}

}  // namespace stop
