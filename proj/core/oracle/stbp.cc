#include "math.h"
#include "stop/error.h"
#include "stop/oracle/oracle.h"

namespace stop::oracle {

StbpResult unrolled_stbp(const NetworkSpec& spec, const NetworkParams& params,
                         const Sample& sample, LossKind loss,
                         bool include_illusory, SpikeMode mode) {
  if (sample.label >= spec.num_classes) {
    throw TargetError("unrolled_stbp_gradients: label out of range");
  }
  const UnrolledTape tape = record_tape(spec, params, sample.frames, mode);
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
  NetworkParams grads(depth);
  // dE*/dU[t+1] carried backwards in time, per spiking layer.
  std::vector<std::vector<double>> carry(depth);
  for (std::size_t l = 0; l < depth; ++l) {
    const LayerSpec& layer = spec.layers[l];
    edges.push_back(layer_connections(layer));
    if (!layer.is_spiking()) continue;
    grads[l].weights = Tensor(layer.weight_shape());
    grads[l].thresholds = Tensor({params[l].thresholds.size()});
    grads[l].leakage = 0.0;
    carry[l].assign(layer.neuron_count(), 0.0);
  }

  for (std::size_t t = tape.length(); t-- > 0;) {
    const auto& step = tape.steps[t];
    // dE*/d(output of layer l at t) from the spatial path.
    std::vector<std::vector<double>> grad_out(depth);
    for (std::size_t l = 0; l < depth; ++l) {
      grad_out[l].assign(spec.layers[l].neuron_count(), 0.0);
    }
    grad_out[top] =
        detail::loss_derivative(step[top].spikes.values(), sample.label, loss);

    for (std::size_t l = top + 1; l-- > lowest;) {
      const LayerSpec& layer = spec.layers[l];
      const StepRecord& r = step[l];
      if (!layer.is_spiking()) {
        if (l == 0) continue;
        for (const Connection& e : edges[l]) {
          grad_out[l - 1][e.input] += e.coefficient * grad_out[l][e.output];
        }
        continue;
      }
      const LayerParams& p = params[l];
      const double alpha = p.leakage;
      const std::size_t n = layer.neuron_count();
      const std::size_t group = n / p.thresholds.size();
      std::vector<double> grad_u(n);
      for (std::size_t j = 0; j < n; ++j) {
        const double theta = p.thresholds[j / group];
        const double ph = detail::phi(r.potentials[j] - theta, spec.surrogate);
        const double next = carry[l][j];
        double grad_s = grad_out[l][j];
        if (include_illusory) grad_s += next * (-alpha * theta);
        grad_u[j] = grad_s * ph + alpha * next;
        grads[l].thresholds[j / group] +=
            -grad_s * ph + next * (-alpha * r.spikes[j]);
        grads[l].leakage += next * (r.potentials[j] - theta * r.spikes[j]);
      }
      for (const Connection& e : edges[l]) {
        const auto w = static_cast<std::size_t>(e.weight);
        grads[l].weights[w] += grad_u[e.output] * r.presynaptic[e.input];
        if (l > lowest) {
          grad_out[l - 1][e.input] += p.weights[w] * grad_u[e.output];
        }
      }
      carry[l] = std::move(grad_u);
    }
  }

  StbpResult result;
  result.gradients = std::move(grads);
  result.loss = tape_loss(spec, tape, sample.label, loss);
  result.tape = tape.audit();
  std::vector<double> counts(spec.num_classes, 0.0);
  for (const auto& step : tape.steps) {
    for (std::size_t j = 0; j < counts.size(); ++j) {
      counts[j] += step[top].spikes[j];
    }
  }
  for (std::size_t j = 1; j < counts.size(); ++j) {
    if (counts[j] > counts[result.prediction]) result.prediction = j;
  }
  return result;
}

NetworkParams unrolled_stbp_gradients(const NetworkSpec& spec,
                                      const NetworkParams& params,
                                      const Sample& sample, LossKind loss,
                                      bool include_illusory, SpikeMode mode) {
  return unrolled_stbp(spec, params, sample, loss, include_illusory, mode)
      .gradients;
}

}  // namespace stop::oracle
