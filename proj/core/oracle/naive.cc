#include <cmath>
#include <string>

#include "math.h"
#include "stop/error.h"
#include "stop/oracle/oracle.h"

namespace stop::oracle {

namespace {

double threshold_of(const LayerParams& p, std::size_t neurons,
                    std::size_t j) {
  return p.thresholds[j / (neurons / p.thresholds.size())];
}

// w~_i[t] = sum_{u <= t} alpha^(t-u) x_i[u]
double weight_trace(const UnrolledTape& tape, std::size_t layer,
                    std::size_t i, std::size_t t, double alpha) {
  double sum = 0.0;
  for (std::size_t u = 0; u <= t; ++u) {
    sum += std::pow(alpha, static_cast<double>(t - u)) *
           tape.steps[u][layer].presynaptic[i];
  }
  return sum;
}

// th~_j[t] = -sum_{u < t} alpha^(t-u) s_j[u]
double threshold_trace(const UnrolledTape& tape, std::size_t layer,
                       std::size_t j, std::size_t t, double alpha) {
  double sum = 0.0;
  for (std::size_t u = 0; u < t; ++u) {
    sum -= std::pow(alpha, static_cast<double>(t - u)) *
           tape.steps[u][layer].spikes[j];
  }
  return sum;
}

// a~_j[t] = sum_{u < t} alpha^(t-1-u) (U_j[u] - theta_j s_j[u])
double leakage_trace(const UnrolledTape& tape, std::size_t layer,
                     std::size_t j, std::size_t t, double alpha,
                     double theta) {
  double sum = 0.0;
  for (std::size_t u = 0; u < t; ++u) {
    const StepRecord& r = tape.steps[u][layer];
    sum += std::pow(alpha, static_cast<double>(t - 1 - u)) *
           (r.potentials[j] - theta * r.spikes[j]);
  }
  return sum;
}

}  // namespace

NetworkGradients naive_stop_gradients(const NetworkSpec& spec,
                                      const NetworkParams& params,
                                      const Sample& sample, SynergyMode mode,
                                      LossKind loss, SpikeMode spike_mode) {
  if (spec.parameter_count() > kNaiveParameterLimit) {
    throw ParameterError("naive_stop_gradients: " +
                         std::to_string(spec.parameter_count()) +
                         " parameters exceed the enumeration limit");
  }
  if (sample.label >= spec.num_classes) {
    throw TargetError("naive_stop_gradients: label out of range");
  }
  const UnrolledTape tape =
      record_tape(spec, params, sample.frames, spike_mode);
  const std::size_t depth = spec.layers.size();
  const std::size_t top = spec.output_layer();
  std::size_t lowest = depth;
  for (std::size_t l = 0; l < depth; ++l) {
    if (spec.layers[l].is_spiking()) {
      lowest = l;
      break;
    }
  }

  std::vector<std::vector<Connection>> edges;
  NetworkGradients grads(depth);
  for (std::size_t l = 0; l < depth; ++l) {
    const LayerSpec& layer = spec.layers[l];
    edges.push_back(layer_connections(layer));
    if (!layer.is_spiking()) continue;
    grads[l].weights = Tensor(layer.weight_shape());
    grads[l].thresholds = Tensor(layer.output_shape);
    grads[l].leakages = Tensor(layer.output_shape);
  }

  const bool thresholds = mode == SynergyMode::kWT || mode == SynergyMode::kWTL;
  const bool leakages = mode == SynergyMode::kWL || mode == SynergyMode::kWTL;

  for (std::size_t t = 0; t < tape.length(); ++t) {
    const auto& step = tape.steps[t];
    // Errors with respect to each layer's pre-map quantity: U for spiking
    // layers, the output for pass-through layers.
    std::vector<std::vector<double>> err(depth);

    const LayerSpec& out_layer = spec.layers[top];
    const std::size_t n_out = out_layer.neuron_count();
    const std::vector<double> dEds =
        detail::loss_derivative(step[top].spikes.values(), sample.label, loss);
    err[top].resize(n_out);
    for (std::size_t j = 0; j < n_out; ++j) {
      const double theta = threshold_of(params[top], n_out, j);
      err[top][j] = dEds[j] *
                    detail::phi(step[top].potentials[j] - theta, spec.surrogate);
    }
    for (std::size_t l = top; l-- > lowest;) {
      const LayerSpec& layer = spec.layers[l];
      std::vector<double> upstream(layer.neuron_count(), 0.0);
      for (const Connection& e : edges[l + 1]) {
        const double w =
            e.weight >= 0
                ? params[l + 1].weights[static_cast<std::size_t>(e.weight)]
                : e.coefficient;
        upstream[e.input] += w * err[l + 1][e.output];
      }
      if (layer.is_spiking()) {
        const std::size_t n = layer.neuron_count();
        for (std::size_t j = 0; j < n; ++j) {
          const double theta = threshold_of(params[l], n, j);
          upstream[j] *=
              detail::phi(step[l].potentials[j] - theta, spec.surrogate);
        }
      }
      err[l] = std::move(upstream);
    }

    for (std::size_t l = lowest; l < depth; ++l) {
      const LayerSpec& layer = spec.layers[l];
      if (!layer.is_spiking()) continue;
      const LayerParams& p = params[l];
      const std::vector<double>& delta = err[l];
      std::vector<double> wtrace(layer.presynaptic_count());
      for (std::size_t i = 0; i < wtrace.size(); ++i) {
        wtrace[i] = weight_trace(tape, l, i, t, p.leakage);
      }
      for (const Connection& e : edges[l]) {
        grads[l].weights[static_cast<std::size_t>(e.weight)] +=
            delta[e.output] * wtrace[e.input];
      }
      const std::size_t n = layer.neuron_count();
      for (std::size_t j = 0; j < n; ++j) {
        if (thresholds) {
          grads[l].thresholds[j] +=
              delta[j] * (threshold_trace(tape, l, j, t, p.leakage) - 1.0);
        }
        if (leakages) {
          grads[l].leakages[j] +=
              delta[j] * leakage_trace(tape, l, j, t, p.leakage,
                                       threshold_of(p, n, j));
        }
      }
    }
  }
  return grads;
}

}  // namespace stop::oracle
