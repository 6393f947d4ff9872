#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "stop/lif/lif.h"
#include "stop/numerics/kernels.h"
#include "stop/numerics/tensor.h"

namespace stop {

enum class LayerKind { kDense, kConv, kAvgPool, kFlatten };

std::string_view to_string(LayerKind kind);

struct LayerSpec {
  LayerKind kind = LayerKind::kDense;
  Shape input_shape;
  Shape output_shape;
  std::size_t kernel = 0;
  std::size_t stride = 1;
  std::size_t padding = 0;
  std::size_t window = 0;

  static LayerSpec dense(std::size_t fan_in, std::size_t units);
  static LayerSpec conv(const Shape& input, std::size_t channels,
                        std::size_t kernel, std::size_t stride,
                        std::size_t padding);
  static LayerSpec avgpool(const Shape& input, std::size_t window);
  static LayerSpec flatten(const Shape& input);

  // Dense and Conv layers hold LIF neurons; pooling and flattening are
  // stateless linear pass-throughs.
  bool is_spiking() const {
    return kind == LayerKind::kDense || kind == LayerKind::kConv;
  }
  std::size_t neuron_count() const { return shape_size(output_shape); }
  std::size_t presynaptic_count() const { return shape_size(input_shape); }
  std::size_t fan_in() const;
  Shape weight_shape() const;
  // One threshold per dense neuron, one per conv output channel.
  std::size_t threshold_count() const;
  std::size_t threshold_group() const {
    return neuron_count() / threshold_count();
  }
  ConvGeometry geometry() const;
  std::string describe() const;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct NetworkSpec {
  Shape input_shape;
  std::vector<LayerSpec> layers;
  int time_steps = 6;
  SurrogateKind surrogate = SurrogateKind::kExpAbs;
  std::size_t num_classes = 0;

  // Throws ShapeError if the layer chain is broken or the final layer is not
  // a dense layer of width num_classes.
  void validate() const;
  std::vector<std::size_t> spiking_layers() const;
  std::size_t output_layer() const { return layers.size() - 1; }
  std::size_t parameter_count() const;
  std::size_t neuron_count() const;
  std::string describe() const;
};

// Architecture grammar, dash separated:
//   <n>C<k>  convolution, n channels, k x k kernel, stride 1, padding k/2
//   P<w>     average pooling over w x w windows
//   <n>      dense layer of n neurons (a Flatten is inserted before the first)
// The final token must be a dense layer of width num_classes.
NetworkSpec parse_architecture(std::string_view architecture,
                               const Shape& input_shape,
                               std::size_t num_classes);

struct LayerParams {
  Tensor weights;
  Tensor thresholds;
  double leakage = 0.0;

  ThresholdView threshold_view(const LayerSpec& spec) const {
    return {thresholds.values(), spec.threshold_group()};
  }
  friend bool operator==(const LayerParams&, const LayerParams&) = default;
};

// Aligned with NetworkSpec::layers; pass-through layers hold empty params.
using NetworkParams = std::vector<LayerParams>;

enum class InitMode {
  kFanInScaled,   // weights ~ N(0, 2 / fan_in)
  kUnitNormal,  // weights ~ N(0, 1)
};

InitMode parse_init_mode(std::string_view name);
std::string_view to_string(InitMode mode);

inline constexpr double kInitialThreshold = 1.0;
// e^-1
inline constexpr double kInitialLeakage = 0.36787944117144233;

NetworkParams init_params(const NetworkSpec& spec, std::uint64_t seed,
                          InitMode mode = InitMode::kFanInScaled);

// Per-layer dynamic state. Pass-through layers only use `spikes`, which holds
// their (possibly fractional) output.
using NetworkState = std::vector<LifState>;

NetworkState reset_network(const NetworkSpec& spec);

struct ForwardScratch {
  Tensor synaptic_input;
  ConvScratch conv;
};

// Synaptic drive of a spiking layer: W s for dense, conv2d for conv.
void synaptic_input(const LayerSpec& spec, const LayerParams& params,
                    const Tensor& presynaptic, Tensor& out,
                    ConvScratch& scratch);

// Advances one layer by one step given the output of the layer below.
void layer_forward(const LayerSpec& spec, const LayerParams& params,
                   const Tensor& presynaptic, LifState& state,
                   SurrogateKind surrogate, SpikeMode mode,
                   ForwardScratch& scratch);

// One spatial forward sweep over all layers; returns the output-layer spikes.
const Tensor& forward_timestep(const NetworkSpec& spec,
                               const NetworkParams& params,
                               NetworkState& states, const Tensor& input_frame,
                               SpikeMode mode, ForwardScratch& scratch);
const Tensor& forward_timestep(const NetworkSpec& spec,
                               const NetworkParams& params,
                               NetworkState& states, const Tensor& input_frame,
                               SpikeMode mode = SpikeMode::kHard);

// Gradients laid out on the neuron grid: weights are weight-shaped, threshold
// and leakage entries are one per neuron (output-shaped). Summing the
// threshold entries over a conv channel, or the leakage entries over a layer,
// gives the derivative with respect to the shared parameter.
struct LayerGradients {
  Tensor weights;
  Tensor thresholds;
  Tensor leakages;
};
using NetworkGradients = std::vector<LayerGradients>;

NetworkGradients zero_gradients(const NetworkSpec& spec);
// Collapses neuron-grid gradients onto the parameter layout of LayerParams
// (per-channel threshold sums for conv, a single leakage sum per layer).
NetworkParams reduce_to_parameters(const NetworkSpec& spec,
                                   const NetworkGradients& grads);

}  // namespace stop
