#include "stop/topology/network.h"

#include <cmath>
#include <random>
#include <sstream>

#include "stop/error.h"

namespace stop {

std::string_view to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::kDense:
      return "Dense";
    case LayerKind::kConv:
      return "Conv";
    case LayerKind::kAvgPool:
      return "AvgPool";
    case LayerKind::kFlatten:
      return "Flatten";
  }
  return "?";
}

LayerSpec LayerSpec::dense(std::size_t fan_in, std::size_t units) {
  LayerSpec s;
  s.kind = LayerKind::kDense;
  s.input_shape = {fan_in};
  s.output_shape = {units};
  return s;
}

LayerSpec LayerSpec::conv(const Shape& input, std::size_t channels,
                          std::size_t kernel, std::size_t stride,
                          std::size_t padding) {
  if (input.size() != 3) {
    throw ShapeError("conv layer needs a C x H x W input, got " +
                     shape_string(input));
  }
  LayerSpec s;
  s.kind = LayerKind::kConv;
  s.input_shape = input;
  s.kernel = kernel;
  s.stride = stride;
  s.padding = padding;
  ConvGeometry g{input[0], input[1], input[2], channels,
                 kernel,   stride,   padding};
  g.validate();
  s.output_shape = g.output_shape();
  return s;
}

LayerSpec LayerSpec::avgpool(const Shape& input, std::size_t window) {
  if (input.size() != 3) {
    throw ShapeError("pooling needs a C x H x W input, got " +
                     shape_string(input));
  }
  if (window == 0 || input[1] % window != 0 || input[2] % window != 0) {
    throw ShapeError("pool window " + std::to_string(window) +
                     " does not divide " + shape_string(input));
  }
  LayerSpec s;
  s.kind = LayerKind::kAvgPool;
  s.input_shape = input;
  s.window = window;
  s.output_shape = {input[0], input[1] / window, input[2] / window};
  return s;
}

LayerSpec LayerSpec::flatten(const Shape& input) {
  LayerSpec s;
  s.kind = LayerKind::kFlatten;
  s.input_shape = input;
  s.output_shape = {shape_size(input)};
  return s;
}

std::size_t LayerSpec::fan_in() const {
  switch (kind) {
    case LayerKind::kDense:
      return input_shape[0];
    case LayerKind::kConv:
      return input_shape[0] * kernel * kernel;
    default:
      return 0;
  }
}

Shape LayerSpec::weight_shape() const {
  switch (kind) {
    case LayerKind::kDense:
      return {output_shape[0], input_shape[0]};
    case LayerKind::kConv:
      return {output_shape[0], input_shape[0], kernel, kernel};
    default:
      return {0};
  }
}

std::size_t LayerSpec::threshold_count() const {
  switch (kind) {
    case LayerKind::kDense:
      return output_shape[0];
    case LayerKind::kConv:
      return output_shape[0];
    default:
      return 0;
  }
}

ConvGeometry LayerSpec::geometry() const {
  return {input_shape[0], input_shape[1], input_shape[2], output_shape[0],
          kernel,         stride,         padding};
}

std::string LayerSpec::describe() const {
  std::ostringstream out;
  out << to_string(kind);
  switch (kind) {
    case LayerKind::kDense:
      out << "(" << output_shape[0] << ")";
      break;
    case LayerKind::kConv:
      out << "(" << output_shape[0] << "," << kernel << "," << stride << ","
          << padding << ")";
      break;
    case LayerKind::kAvgPool:
      out << "(" << window << ")";
      break;
    case LayerKind::kFlatten:
      break;
  }
  return out.str();
}

void NetworkSpec::validate() const {
  if (layers.empty()) throw ShapeError("network has no layers");
  if (time_steps < 1) throw ShapeError("time_steps must be >= 1");
  Shape current = input_shape;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (layers[l].input_shape != current) {
      throw ShapeError("layer " + std::to_string(l) + " expects " +
                       shape_string(layers[l].input_shape) + " but receives " +
                       shape_string(current));
    }
    current = layers[l].output_shape;
  }
  const LayerSpec& last = layers.back();
  if (last.kind != LayerKind::kDense || last.output_shape[0] != num_classes) {
    throw ShapeError("final layer must be Dense(" +
                     std::to_string(num_classes) + "), got " +
                     last.describe());
  }
}

std::vector<std::size_t> NetworkSpec::spiking_layers() const {
  std::vector<std::size_t> out;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (layers[l].is_spiking()) out.push_back(l);
  }
  return out;
}

std::size_t NetworkSpec::parameter_count() const {
  std::size_t count = 0;
  for (const LayerSpec& layer : layers) {
    if (!layer.is_spiking()) continue;
    count += shape_size(layer.weight_shape()) + layer.threshold_count() + 1;
  }
  return count;
}

std::size_t NetworkSpec::neuron_count() const {
  std::size_t count = 0;
  for (const LayerSpec& layer : layers) {
    if (layer.is_spiking()) count += layer.neuron_count();
  }
  return count;
}

std::string NetworkSpec::describe() const {
  std::string out = "[";
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (l > 0) out += ", ";
    out += layers[l].describe();
  }
  return out + "]";
}

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  return true;
}

std::size_t to_count(std::string_view s, std::size_t position) {
  std::size_t value = 0;
  for (char c : s) {
    value = value * 10 + static_cast<std::size_t>(c - '0');
    if (value > 1'000'000) throw ParseError("value too large", position);
  }
  if (value == 0) throw ParseError("zero-sized layer", position);
  return value;
}

}  // namespace

NetworkSpec parse_architecture(std::string_view architecture,
                               const Shape& input_shape,
                               std::size_t num_classes) {
  if (architecture.empty()) throw ParseError("empty architecture", 0);
  if (input_shape.empty() || shape_size(input_shape) == 0) {
    throw ParseError("empty input shape", 0);
  }
  NetworkSpec spec;
  spec.input_shape = input_shape;
  spec.num_classes = num_classes;
  Shape current = input_shape;

  std::size_t position = 0;
  std::size_t start = 0;
  while (start <= architecture.size()) {
    std::size_t end = architecture.find('-', start);
    if (end == std::string_view::npos) end = architecture.size();
    const std::string_view token = architecture.substr(start, end - start);

    try {
      const std::size_t c_pos = token.find('C');
      if (all_digits(token)) {
        if (current.size() != 1) {
          spec.layers.push_back(LayerSpec::flatten(current));
          current = spec.layers.back().output_shape;
        }
        spec.layers.push_back(
            LayerSpec::dense(current[0], to_count(token, position)));
      } else if (token.size() > 1 && token[0] == 'P' &&
                 all_digits(token.substr(1))) {
        if (current.size() != 3) {
          throw ParseError("pooling after a flat layer", position);
        }
        spec.layers.push_back(
            LayerSpec::avgpool(current, to_count(token.substr(1), position)));
      } else if (c_pos != std::string_view::npos &&
                 all_digits(token.substr(0, c_pos)) &&
                 all_digits(token.substr(c_pos + 1))) {
        if (current.size() != 3) {
          throw ParseError("convolution after a flat layer", position);
        }
        const std::size_t channels =
            to_count(token.substr(0, c_pos), position);
        const std::size_t kernel = to_count(token.substr(c_pos + 1), position);
        spec.layers.push_back(
            LayerSpec::conv(current, channels, kernel, 1, kernel / 2));
      } else {
        throw ParseError("unknown token '" + std::string(token) + "'",
                         position);
      }
    } catch (const ShapeError& e) {
      throw ParseError(e.what(), position);
    }
    current = spec.layers.back().output_shape;

    ++position;
    start = end + 1;
    if (end == architecture.size()) break;
  }

  const LayerSpec& last = spec.layers.back();
  if (last.kind != LayerKind::kDense || last.output_shape[0] != num_classes) {
    throw ParseError("final layer must be a dense layer of width " +
                         std::to_string(num_classes),
                     position - 1);
  }
  return spec;
}

InitMode parse_init_mode(std::string_view name) {
  if (name == "fan_in" || name == "faninscaled" || name == "FanInScaled") {
    return InitMode::kFanInScaled;
  }
  if (name == "unit_normal" || name == "unitnormal" || name == "UnitNormal") {
    return InitMode::kUnitNormal;
  }
  throw ParameterError("unknown init mode '" + std::string(name) + "'");
}

std::string_view to_string(InitMode mode) {
  return mode == InitMode::kFanInScaled ? "fan_in" : "unit_normal";
}

NetworkParams init_params(const NetworkSpec& spec, std::uint64_t seed,
                          InitMode mode) {
  std::mt19937_64 rng(seed);
  NetworkParams params(spec.layers.size());
  for (std::size_t l = 0; l < spec.layers.size(); ++l) {
    const LayerSpec& layer = spec.layers[l];
    if (!layer.is_spiking()) continue;
    const double sigma =
        mode == InitMode::kUnitNormal
            ? 1.0
            : std::sqrt(2.0 / static_cast<double>(layer.fan_in()));
    std::normal_distribution<double> normal(0.0, sigma);
    LayerParams& p = params[l];
    p.weights = Tensor(layer.weight_shape());
    for (double& w : p.weights.values()) w = normal(rng);
    p.thresholds = Tensor({layer.threshold_count()}, kInitialThreshold);
    p.leakage = kInitialLeakage;
  }
  return params;
}

NetworkState reset_network(const NetworkSpec& spec) {
  NetworkState states;
  states.reserve(spec.layers.size());
  for (const LayerSpec& layer : spec.layers) {
    if (layer.is_spiking()) {
      states.push_back(LifState::zeros(layer.output_shape));
    } else {
      states.push_back({Tensor(), Tensor(layer.output_shape)});
    }
  }
  return states;
}

void synaptic_input(const LayerSpec& spec, const LayerParams& params,
                    const Tensor& presynaptic, Tensor& out,
                    ConvScratch& scratch) {
  if (spec.kind == LayerKind::kDense) {
    if (out.shape() != spec.output_shape) out = Tensor(spec.output_shape);
    matvec(params.weights, presynaptic.values(), out.values());
  } else if (spec.kind == LayerKind::kConv) {
    conv2d(presynaptic, params.weights, spec.geometry(), out, scratch);
  } else {
    throw ShapeError("synaptic_input on a non-spiking layer");
  }
}

void layer_forward(const LayerSpec& spec, const LayerParams& params,
                   const Tensor& presynaptic, LifState& state,
                   SurrogateKind surrogate, SpikeMode mode,
                   ForwardScratch& scratch) {
  switch (spec.kind) {
    case LayerKind::kDense:
    case LayerKind::kConv:
      synaptic_input(spec, params, presynaptic, scratch.synaptic_input,
                     scratch.conv);
      lif_step(state, scratch.synaptic_input.values(),
               params.threshold_view(spec), params.leakage, surrogate, mode);
      break;
    case LayerKind::kAvgPool:
      avgpool2d(presynaptic, spec.window, state.spikes);
      break;
    case LayerKind::kFlatten:
      if (presynaptic.size() != state.spikes.size()) {
        throw ShapeError("flatten: size mismatch");
      }
      std::copy(presynaptic.data(), presynaptic.data() + presynaptic.size(),
                state.spikes.data());
      break;
  }
}

const Tensor& forward_timestep(const NetworkSpec& spec,
                               const NetworkParams& params,
                               NetworkState& states, const Tensor& input_frame,
                               SpikeMode mode, ForwardScratch& scratch) {
  if (input_frame.shape() != spec.input_shape) {
    throw ShapeError("input frame " + shape_string(input_frame.shape()) +
                     " does not match network input " +
                     shape_string(spec.input_shape));
  }
  const Tensor* presynaptic = &input_frame;
  for (std::size_t l = 0; l < spec.layers.size(); ++l) {
    layer_forward(spec.layers[l], params[l], *presynaptic, states[l],
                  spec.surrogate, mode, scratch);
    presynaptic = &states[l].spikes;
  }
  return *presynaptic;
}

const Tensor& forward_timestep(const NetworkSpec& spec,
                               const NetworkParams& params,
                               NetworkState& states, const Tensor& input_frame,
                               SpikeMode mode) {
  ForwardScratch scratch;
  return forward_timestep(spec, params, states, input_frame, mode, scratch);
}

NetworkGradients zero_gradients(const NetworkSpec& spec) {
  NetworkGradients grads(spec.layers.size());
  for (std::size_t l = 0; l < spec.layers.size(); ++l) {
    const LayerSpec& layer = spec.layers[l];
    if (!layer.is_spiking()) continue;
    grads[l].weights = Tensor(layer.weight_shape());
    grads[l].thresholds = Tensor(layer.output_shape);
    grads[l].leakages = Tensor(layer.output_shape);
  }
  return grads;
}

NetworkParams reduce_to_parameters(const NetworkSpec& spec,
                                   const NetworkGradients& grads) {
  NetworkParams out(spec.layers.size());
  for (std::size_t l = 0; l < spec.layers.size(); ++l) {
    const LayerSpec& layer = spec.layers[l];
    if (!layer.is_spiking()) continue;
    out[l].weights = grads[l].weights;
    out[l].thresholds = Tensor({layer.threshold_count()});
    const std::size_t group = layer.threshold_group();
    for (std::size_t n = 0; n < layer.neuron_count(); ++n) {
      out[l].thresholds[n / group] += grads[l].thresholds[n];
    }
    out[l].leakage = grads[l].leakages.sum();
  }
  return out;
}

}  // namespace stop
