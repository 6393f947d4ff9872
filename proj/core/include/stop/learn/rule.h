#pragma once

#include <cstddef>
#include <span>
#include <string_view>

#include "stop/lif/lif.h"
#include "stop/numerics/kernels.h"
#include "stop/numerics/tensor.h"
#include "stop/topology/network.h"

namespace stop {

// Which parameter families learn: weights only, plus thresholds, plus
// leakages, or all three.
enum class SynergyMode { kW, kWT, kWL, kWTL };

SynergyMode parse_synergy_mode(std::string_view name);
std::string_view to_string(SynergyMode mode);

inline bool learns_thresholds(SynergyMode mode) {
  return mode == SynergyMode::kWT || mode == SynergyMode::kWTL;
}
inline bool learns_leakage(SynergyMode mode) {
  return mode == SynergyMode::kWL || mode == SynergyMode::kWTL;
}

enum class LossKind { kCrossEntropy, kMeanSquared };

LossKind parse_loss(std::string_view name);
std::string_view to_string(LossKind loss);

// Lower bound applied to every threshold after an update.
inline constexpr double kDefaultThresholdFloor = 0.01;

// ---------------------------------------------------------------------------
// Temporally-forward traces. Each is updated once per time-step and only the
// current value is kept.

// w~[t] = alpha w~[t-1] + s_pre[t]. One entry per presynaptic unit, shared by
// every postsynaptic neuron of the layer.
void update_weight_traces(Tensor& traces, const Tensor& presynaptic_spikes,
                          double leakage);

// th~[t] = alpha (th~[t-1] - s[t-1]), driven by the neuron's own spikes.
void update_threshold_traces(Tensor& traces, const Tensor& previous_spikes,
                             double leakage);

// a~[t] = alpha a~[t-1] + (U[t-1] - theta s[t-1]).
void update_leakage_traces(Tensor& traces, const Tensor& previous_potentials,
                           const Tensor& previous_spikes,
                           ThresholdView thresholds, double leakage);

// ---------------------------------------------------------------------------
// Losses and spatially-backward neuron errors for a single time-step.

// Throws TargetError unless `target` has exactly one 1 and zeros elsewhere.
void check_one_hot(std::span<const double> target);

void softmax(std::span<const double> x, std::span<double> out);

// E[t]: cross entropy of softmax(s) against the one-hot target, or half the
// squared distance.
double instant_loss(std::span<const double> spikes,
                    std::span<const double> target, LossKind loss);

// dE[t]/ds: softmax(s) - target (CE) or s - target (MSE).
void loss_gradient(std::span<const double> spikes,
                   std::span<const double> target, LossKind loss,
                   std::span<double> out);

// delta^L = dE[t]/ds * phi(U - theta).
void output_error(const Tensor& spikes, const Tensor& target,
                  const Tensor& potentials, ThresholdView thresholds,
                  LossKind loss, SurrogateKind surrogate, Tensor& delta);
Tensor output_error(const Tensor& spikes, const Tensor& target,
                    const Tensor& potentials, ThresholdView thresholds,
                    LossKind loss, SurrogateKind surrogate);

// Moves an error defined on a layer's output back onto that layer's input:
// W^T d for dense, the conv2d adjoint for conv, the pooling adjoint for
// pooling and a reshape for flatten.
void error_to_presynaptic(const LayerSpec& layer, const LayerParams& params,
                          const Tensor& error, Tensor& out,
                          ConvScratch& scratch);

// delta^l = (dE/ds^l) * phi(U^l - theta^l), where dE/ds^l has already been
// propagated down from the layer above.
void hidden_error(const Tensor& spike_error, const Tensor& potentials,
                  ThresholdView thresholds, SurrogateKind surrogate,
                  Tensor& delta);
// Adjacent spiking layers: delta_j = (sum_k delta_k w_kj) phi(U_j - theta_j).
Tensor hidden_error(const Tensor& upper_delta, const LayerSpec& upper,
                    const LayerParams& upper_params, const Tensor& potentials,
                    ThresholdView thresholds, SurrogateKind surrogate);

// ---------------------------------------------------------------------------
// Accumulation and parameter updates.

struct LayerTraces {
  Tensor weight;     // presynaptic-shaped
  Tensor threshold;  // neuron-shaped, empty unless thresholds learn
  Tensor leakage;    // neuron-shaped, empty unless leakages learn
};

// Running sums over time-steps (and batch elements) on the neuron grid.
struct GradAccumulator {
  GradAccumulator() = default;
  explicit GradAccumulator(const NetworkSpec& spec);

  NetworkGradients layers;
  std::size_t samples = 0;
  double loss = 0.0;
  std::size_t correct = 0;

  void reset();
  // Adds `other` into this accumulator.
  void merge(const GradAccumulator& other);
};

// dW += delta (x) w~ ; dTheta_j += delta_j (th~_j - 1) ; dAlpha_j += delta_j a~_j.
// `threshold_bypass` is the coefficient of the direct theta -> s path and is
// -1 for the correct rule.
void accumulate_gradients(LayerGradients& acc, const LayerSpec& layer,
                          const Tensor& delta, const LayerTraces& traces,
                          SynergyMode mode, ConvScratch& scratch,
                          double threshold_bypass = -1.0);

struct LearningRates {
  double weight = 1e-2;
  double threshold = 1e-4;
  double leakage = 1e-4;
};

struct UpdateOptions {
  double weight_decay = 0.0;
  double threshold_floor = kDefaultThresholdFloor;
};

// w <- w - eta_w (dW / batch + lambda w).
void apply_weight_updates(NetworkParams& params, const GradAccumulator& acc,
                          double rate, const UpdateOptions& options,
                          std::size_t batch_size);

// Descent directions after dividing by batch_size: the per-threshold mean of
// the neuron-grid threshold gradients (a channel mean for conv layers) and
// the layer mean of the leakage gradients. Throw NumericError on NaN.
Tensor threshold_step(const LayerSpec& layer, const LayerGradients& grads,
                      std::size_t batch_size);
double leakage_step(const LayerSpec& layer, const LayerGradients& grads,
                    std::size_t batch_size);

// theta <- max(eps, theta - eta_theta dTheta), with conv dTheta averaged over
// each channel's neurons; alpha <- clamp(alpha - eta_alpha mean_j dAlpha_j).
// Both gradients are first divided by batch_size. Gated by `mode`.
void apply_threshold_leakage_updates(NetworkParams& params,
                                     const NetworkSpec& spec,
                                     const GradAccumulator& acc,
                                     const LearningRates& rates,
                                     SynergyMode mode,
                                     const UpdateOptions& options,
                                     std::size_t batch_size);

void apply_updates(NetworkParams& params, const NetworkSpec& spec,
                   const GradAccumulator& acc, const LearningRates& rates,
                   SynergyMode mode, const UpdateOptions& options,
                   std::size_t batch_size);

}  // namespace stop
