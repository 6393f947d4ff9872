#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "stop/numerics/tensor.h"

namespace stop {

// Smooth stand-in for dH/dx used whenever an error crosses a spike.
//   ExpAbs:  phi(x) = exp(-|x|)
//   InvQuad: phi(x) = 1 / (1 + pi^2 x^2)
enum class SurrogateKind { kExpAbs, kInvQuad };

// Hard fires through the Heaviside step. Soft replaces the step by the exact
// antiderivative of the surrogate.
enum class SpikeMode { kHard, kSoft };

SurrogateKind parse_surrogate(std::string_view name);
std::string_view to_string(SurrogateKind kind);
SpikeMode parse_spike_mode(std::string_view name);
std::string_view to_string(SpikeMode mode);

double surrogate(double x, SurrogateKind kind);
Tensor surrogate_eval(const Tensor& x, SurrogateKind kind);

// Sigmoid-like antiderivative of surrogate(x), vanishing at -inf:
//   ExpAbs:  e^x for x < 0, 2 - e^-x otherwise; range (0, 2)
//   InvQuad: 1/2 + atan(pi x) / pi;                range (0, 1)
// The ExpAbs surrogate has unit peak and area 2, so its antiderivative
// cannot stay inside (0, 1).
double soft_spike(double x, SurrogateKind kind);

// Heaviside with H(0) = 1.
inline double heaviside(double x) { return x >= 0.0 ? 1.0 : 0.0; }

inline double fire(double x, SpikeMode mode, SurrogateKind kind) {
  return mode == SpikeMode::kHard ? heaviside(x) : soft_spike(x, kind);
}

// Firing thresholds of a layer. Dense layers carry one value per neuron
// (group_size 1); convolutional layers share one value per channel, so a
// neuron n reads values[n / group_size].
struct ThresholdView {
  std::span<const double> values;
  std::size_t group_size = 1;

  double operator()(std::size_t neuron) const {
    return values[neuron / group_size];
  }
  std::size_t neuron_count() const { return values.size() * group_size; }
};

// Membrane potentials U and emitted spikes s of one layer at the current step.
struct LifState {
  Tensor potentials;
  Tensor spikes;

  static LifState zeros(const Shape& shape) {
    return {Tensor(shape), Tensor(shape)};
  }
};

// Advances one time-step in place:
//   U[t] = alpha (U[t-1] - theta s[t-1]) + input
//   s[t] = H(U[t] - theta)          (Hard)   or soft_spike(U[t] - theta)
// Throws ParameterError for theta <= 0 or alpha outside [0, 1].
void lif_step(LifState& state, std::span<const double> synaptic_input,
              ThresholdView thresholds, double leakage, SurrogateKind surrogate,
              SpikeMode mode);

LifState lif_step(const LifState& state, const Tensor& synaptic_input,
                  ThresholdView thresholds, double leakage,
                  SurrogateKind surrogate, SpikeMode mode);

// Direct coding: raw / max_value repeated at every one of the T steps.
std::vector<Tensor> encode_direct(const Tensor& raw, double max_value,
                                  int time_steps);

// Index of the output neuron with the most spikes; ties go to the lowest index.
std::size_t decode_prediction(const std::vector<Tensor>& output_spikes);
std::size_t decode_counts(std::span<const double> spike_counts);

}  // namespace stop
