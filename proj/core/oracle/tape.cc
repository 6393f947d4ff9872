#include <string>

#include "math.h"
#include "stop/error.h"
#include "stop/oracle/oracle.h"

namespace stop::oracle {

std::vector<Connection> layer_connections(const LayerSpec& layer) {
  std::vector<Connection> edges;
  const Shape& in = layer.input_shape;
  const Shape& out = layer.output_shape;
  switch (layer.kind) {
    case LayerKind::kDense: {
      const std::size_t n_in = shape_size(in);
      const std::size_t n_out = shape_size(out);
      edges.reserve(n_in * n_out);
      for (std::size_t j = 0; j < n_out; ++j) {
        for (std::size_t i = 0; i < n_in; ++i) {
          edges.push_back({j, i, static_cast<std::ptrdiff_t>(j * n_in + i)});
        }
      }
      break;
    }
    case LayerKind::kConv: {
      const std::size_t cin = in[0], h = in[1], w = in[2];
      const std::size_t cout = out[0], oh = out[1], ow = out[2];
      const std::size_t k = layer.kernel;
      const auto pad = static_cast<std::ptrdiff_t>(layer.padding);
      for (std::size_t co = 0; co < cout; ++co) {
        for (std::size_t y = 0; y < oh; ++y) {
          for (std::size_t x = 0; x < ow; ++x) {
            const std::size_t j = (co * oh + y) * ow + x;
            for (std::size_t ci = 0; ci < cin; ++ci) {
              for (std::size_t ky = 0; ky < k; ++ky) {
                for (std::size_t kx = 0; kx < k; ++kx) {
                  const std::ptrdiff_t iy =
                      static_cast<std::ptrdiff_t>(y * layer.stride + ky) - pad;
                  const std::ptrdiff_t ix =
                      static_cast<std::ptrdiff_t>(x * layer.stride + kx) - pad;
                  if (iy < 0 || ix < 0 || iy >= static_cast<std::ptrdiff_t>(h) ||
                      ix >= static_cast<std::ptrdiff_t>(w)) {
                    continue;
                  }
                  const std::size_t i =
                      (ci * h + static_cast<std::size_t>(iy)) * w +
                      static_cast<std::size_t>(ix);
                  const auto widx = static_cast<std::ptrdiff_t>(
                      ((co * cin + ci) * k + ky) * k + kx);
                  edges.push_back({j, i, widx});
                }
              }
            }
          }
        }
      }
      break;
    }
    case LayerKind::kAvgPool: {
      const std::size_t c = in[0], h = in[1], w = in[2];
      const std::size_t win = layer.window;
      const std::size_t oh = h / win, ow = w / win;
      const double coef = 1.0 / static_cast<double>(win * win);
      for (std::size_t ch = 0; ch < c; ++ch) {
        for (std::size_t y = 0; y < oh; ++y) {
          for (std::size_t x = 0; x < ow; ++x) {
            const std::size_t j = (ch * oh + y) * ow + x;
            for (std::size_t dy = 0; dy < win; ++dy) {
              for (std::size_t dx = 0; dx < win; ++dx) {
                const std::size_t i = (ch * h + y * win + dy) * w + x * win + dx;
                edges.push_back({j, i, -1, coef});
              }
            }
          }
        }
      }
      break;
    }
    case LayerKind::kFlatten: {
      const std::size_t n = shape_size(in);
      for (std::size_t i = 0; i < n; ++i) edges.push_back({i, i, -1, 1.0});
      break;
    }
  }
  return edges;
}

namespace {

double threshold_of(const LayerParams& p, std::size_t neurons,
                    std::size_t j) {
  const std::size_t group = neurons / p.thresholds.size();
  return p.thresholds[j / group];
}

Tensor apply_connections(const std::vector<Connection>& edges,
                         const Tensor& weights, const Tensor& x,
                         const Shape& out_shape) {
  Tensor y(out_shape);
  for (const Connection& e : edges) {
    const double w = e.weight >= 0
                         ? weights[static_cast<std::size_t>(e.weight)]
                         : e.coefficient;
    y[e.output] += w * x[e.input];
  }
  return y;
}

// U[t] and s[t] of a spiking layer from its drive and the previous state.
void integrate(const LayerSpec& layer, const LayerParams& p,
               SurrogateKind surrogate, SpikeMode mode, const Tensor& drive,
               const Tensor* prev_u, const Tensor* prev_s, Tensor& u,
               Tensor& s) {
  const std::size_t n = layer.neuron_count();
  u = Tensor(layer.output_shape);
  s = Tensor(layer.output_shape);
  for (std::size_t j = 0; j < n; ++j) {
    const double theta = threshold_of(p, n, j);
    const double residual =
        prev_u ? (*prev_u)[j] - theta * (*prev_s)[j] : 0.0;
    u[j] = p.leakage * residual + drive[j];
    s[j] = detail::spike(u[j] - theta, mode, surrogate);
  }
}

}  // namespace

TapeAudit UnrolledTape::audit() const {
  TapeAudit a;
  a.steps = steps.size();
  for (const auto& step : steps) {
    for (const StepRecord& r : step) {
      for (const Tensor* t : {&r.presynaptic, &r.input, &r.potentials,
                              &r.spikes}) {
        if (t->empty()) continue;
        a.tensors += 1;
        a.values += t->size();
      }
    }
  }
  return a;
}

UnrolledTape record_tape(const NetworkSpec& spec, const NetworkParams& params,
                         const std::vector<Tensor>& frames, SpikeMode mode) {
  spec.validate();
  if (params.size() != spec.layers.size()) {
    throw ShapeError("record_tape: parameter list does not match the network");
  }
  std::size_t per_step = 0;
  for (const LayerSpec& layer : spec.layers) {
    per_step += layer.presynaptic_count() + 3 * layer.neuron_count();
  }
  if (per_step * frames.size() > kTapeValueLimit) {
    throw ParameterError("record_tape: tape of " +
                         std::to_string(per_step * frames.size()) +
                         " values exceeds the limit");
  }
  std::vector<std::vector<Connection>> edges;
  for (const LayerSpec& layer : spec.layers) {
    edges.push_back(layer_connections(layer));
  }

  UnrolledTape tape;
  tape.mode = mode;
  for (std::size_t t = 0; t < frames.size(); ++t) {
    if (frames[t].shape() != spec.input_shape) {
      throw ShapeError("record_tape: frame shape " +
                       shape_string(frames[t].shape()));
    }
    std::vector<StepRecord> step(spec.layers.size());
    const Tensor* x = &frames[t];
    for (std::size_t l = 0; l < spec.layers.size(); ++l) {
      const LayerSpec& layer = spec.layers[l];
      StepRecord& r = step[l];
      r.presynaptic = *x;
      if (layer.is_spiking()) {
        r.input = apply_connections(edges[l], params[l].weights, *x,
                                    layer.output_shape);
        const StepRecord* prev = t > 0 ? &tape.steps[t - 1][l] : nullptr;
        integrate(layer, params[l], spec.surrogate, mode, r.input,
                  prev ? &prev->potentials : nullptr,
                  prev ? &prev->spikes : nullptr, r.potentials, r.spikes);
      } else {
        r.spikes =
            apply_connections(edges[l], Tensor(), *x, layer.output_shape);
      }
      x = &r.spikes;
    }
    tape.steps.push_back(std::move(step));
  }
  return tape;
}

bool replay_matches(const NetworkSpec& spec, const NetworkParams& params,
                    const UnrolledTape& tape) {
  std::vector<std::vector<Connection>> edges;
  for (const LayerSpec& layer : spec.layers) {
    edges.push_back(layer_connections(layer));
  }
  for (std::size_t t = 0; t < tape.length(); ++t) {
    for (std::size_t l = 0; l < spec.layers.size(); ++l) {
      const LayerSpec& layer = spec.layers[l];
      const StepRecord& r = tape.steps[t][l];
      if (l > 0 && !(r.presynaptic == tape.steps[t][l - 1].spikes)) {
        return false;
      }
      if (!layer.is_spiking()) {
        if (!(apply_connections(edges[l], Tensor(), r.presynaptic,
                                layer.output_shape) == r.spikes)) {
          return false;
        }
        continue;
      }
      const Tensor drive = apply_connections(edges[l], params[l].weights,
                                             r.presynaptic, layer.output_shape);
      if (!(drive == r.input)) return false;
      const StepRecord* prev = t > 0 ? &tape.steps[t - 1][l] : nullptr;
      Tensor u, s;
      integrate(layer, params[l], spec.surrogate, tape.mode, r.input,
                prev ? &prev->potentials : nullptr,
                prev ? &prev->spikes : nullptr, u, s);
      if (!(u == r.potentials) || !(s == r.spikes)) return false;
    }
  }
  return true;
}

double tape_loss(const NetworkSpec& spec, const UnrolledTape& tape,
                 std::size_t label, LossKind loss) {
  double e = 0.0;
  for (const auto& step : tape.steps) {
    e += detail::loss_value(step[spec.output_layer()].spikes.values(), label,
                            loss);
  }
  return e;
}

double total_loss(const NetworkSpec& spec, const NetworkParams& params,
                  const Sample& sample, LossKind loss, SpikeMode mode) {
  return tape_loss(spec, record_tape(spec, params, sample.frames, mode),
                   sample.label, loss);
}

}  // namespace stop::oracle
