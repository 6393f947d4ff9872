#include "stop/lif/lif.h"

#include <cmath>
#include <numbers>
#include <string>

#include "stop/error.h"

namespace stop {

SurrogateKind parse_surrogate(std::string_view name) {
  if (name == "exp" || name == "expabs" || name == "ExpAbs") {
    return SurrogateKind::kExpAbs;
  }
  if (name == "invquad" || name == "InvQuad") return SurrogateKind::kInvQuad;
  throw ParameterError("unknown surrogate '" + std::string(name) +
                       "' (expected expabs or invquad)");
}

std::string_view to_string(SurrogateKind kind) {
  return kind == SurrogateKind::kExpAbs ? "expabs" : "invquad";
}

SpikeMode parse_spike_mode(std::string_view name) {
  if (name == "hard") return SpikeMode::kHard;
  if (name == "soft") return SpikeMode::kSoft;
  throw ParameterError("unknown spike mode '" + std::string(name) + "'");
}

std::string_view to_string(SpikeMode mode) {
  return mode == SpikeMode::kHard ? "hard" : "soft";
}

double surrogate(double x, SurrogateKind kind) {
  switch (kind) {
    case SurrogateKind::kExpAbs:
      return std::exp(-std::abs(x));
    case SurrogateKind::kInvQuad: {
      const double px = std::numbers::pi * x;
      return 1.0 / (1.0 + px * px);
    }
  }
  return 0.0;
}

Tensor surrogate_eval(const Tensor& x, SurrogateKind kind) {
  Tensor out = Tensor::zeros_like(x);
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = surrogate(x[i], kind);
  return out;
}

double soft_spike(double x, SurrogateKind kind) {
  switch (kind) {
    case SurrogateKind::kExpAbs:
      return x < 0.0 ? std::exp(x) : 2.0 - std::exp(-x);
    case SurrogateKind::kInvQuad:
      return 0.5 + std::atan(std::numbers::pi * x) / std::numbers::pi;
  }
  return 0.0;
}

void lif_step(LifState& state, std::span<const double> synaptic_input,
              ThresholdView thresholds, double leakage, SurrogateKind surrogate,
              SpikeMode mode) {
  const std::size_t n = state.potentials.size();
  if (synaptic_input.size() != n || state.spikes.size() != n ||
      thresholds.neuron_count() != n) {
    throw ShapeError("lif_step: " + std::to_string(n) + " neurons, input " +
                     std::to_string(synaptic_input.size()) + ", thresholds " +
                     std::to_string(thresholds.neuron_count()));
  }
  if (!(leakage >= 0.0 && leakage <= 1.0)) {
    throw ParameterError("lif_step: leakage " + std::to_string(leakage) +
                         " outside [0, 1]");
  }
  for (double theta : thresholds.values) {
    if (!(theta > 0.0)) {
      throw ParameterError("lif_step: threshold " + std::to_string(theta) +
                           " must be positive");
    }
  }
  double* u = state.potentials.data();
  double* s = state.spikes.data();
  for (std::size_t j = 0; j < n; ++j) {
    const double theta = thresholds(j);
    u[j] = leakage * (u[j] - theta * s[j]) + synaptic_input[j];
    s[j] = fire(u[j] - theta, mode, surrogate);
  }
}

LifState lif_step(const LifState& state, const Tensor& synaptic_input,
                  ThresholdView thresholds, double leakage,
                  SurrogateKind surrogate, SpikeMode mode) {
  LifState next = state;
  lif_step(next, synaptic_input.values(), thresholds, leakage, surrogate,
           mode);
  return next;
}

std::vector<Tensor> encode_direct(const Tensor& raw, double max_value,
                                  int time_steps) {
  if (time_steps < 1) {
    throw EncodingError("encode_direct: time_steps must be >= 1");
  }
  if (!(max_value > 0.0)) {
    throw EncodingError("encode_direct: max_value must be positive");
  }
  Tensor frame = Tensor::zeros_like(raw);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!(raw[i] >= 0.0) || raw[i] > max_value) {
      throw EncodingError("encode_direct: value " + std::to_string(raw[i]) +
                          " outside [0, " + std::to_string(max_value) + "]");
    }
    frame[i] = raw[i] / max_value;
  }
  return std::vector<Tensor>(static_cast<std::size_t>(time_steps), frame);
}

std::size_t decode_counts(std::span<const double> spike_counts) {
  if (spike_counts.empty()) {
    throw DecodingError("decode: no output neurons");
  }
  std::size_t best = 0;
  for (std::size_t j = 1; j < spike_counts.size(); ++j) {
    if (spike_counts[j] > spike_counts[best]) best = j;
  }
  return best;
}

std::size_t decode_prediction(const std::vector<Tensor>& output_spikes) {
  if (output_spikes.empty()) {
    throw DecodingError("decode_prediction: empty spike sequence");
  }
  std::vector<double> counts(output_spikes.front().size(), 0.0);
  for (const Tensor& step : output_spikes) {
    if (step.size() != counts.size()) {
      throw ShapeError("decode_prediction: inconsistent output widths");
    }
    for (std::size_t j = 0; j < counts.size(); ++j) counts[j] += step[j];
  }
  return decode_counts(counts);
}

}  // namespace stop
