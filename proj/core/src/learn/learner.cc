#include "stop/learn/learner.h"

#include "stop/error.h"

namespace stop {

StopLearner::StopLearner(const NetworkSpec& spec, LearnerOptions options)
    : spec_(spec), options_(options) {
  spec_.validate();
  lowest_spiking_ = spec_.spiking_layers().front();
  states_ = reset_network(spec_);
  traces_.resize(spec_.layers.size());
  deltas_.resize(spec_.layers.size());
  spike_errors_.resize(spec_.layers.size());
  for (std::size_t l = 0; l < spec_.layers.size(); ++l) {
    const LayerSpec& layer = spec_.layers[l];
    spike_errors_[l] = Tensor(layer.output_shape);
    if (layer.is_spiking()) deltas_[l] = Tensor(layer.output_shape);
  }
  target_ = Tensor({spec_.num_classes});
  counts_.assign(spec_.num_classes, 0.0);
}

void StopLearner::reset(SynergyMode mode) {
  for (LifState& state : states_) {
    state.potentials.fill(0.0);
    state.spikes.fill(0.0);
  }
  for (std::size_t l = 0; l < spec_.layers.size(); ++l) {
    const LayerSpec& layer = spec_.layers[l];
    if (!layer.is_spiking()) continue;
    LayerTraces& t = traces_[l];
    t.weight = Tensor(layer.input_shape);
    t.threshold =
        learns_thresholds(mode) ? Tensor(layer.output_shape) : Tensor();
    t.leakage = learns_leakage(mode) ? Tensor(layer.output_shape) : Tensor();
  }
  std::fill(counts_.begin(), counts_.end(), 0.0);
}

SampleOutcome StopLearner::learn(const NetworkParams& params,
                                 const Sample& sample, SynergyMode mode,
                                 LossKind loss, GradAccumulator& acc) {
  if (sample.frames.empty()) {
    throw ShapeError("learn: sample has no frames");
  }
  if (sample.label >= spec_.num_classes) {
    throw TargetError("learn: label " + std::to_string(sample.label) +
                      " outside " + std::to_string(spec_.num_classes) +
                      " classes");
  }
  if (params.size() != spec_.layers.size()) {
    throw ShapeError("learn: parameter list does not match the network");
  }
  reset(mode);
  target_.fill(0.0);
  target_[sample.label] = 1.0;

  const std::size_t out = spec_.output_layer();
  SampleOutcome outcome;

  for (const Tensor& frame : sample.frames) {
    if (frame.shape() != spec_.input_shape) {
      throw ShapeError("learn: frame " + shape_string(frame.shape()) +
                       " does not match input " +
                       shape_string(spec_.input_shape));
    }
    // Spatial forward with temporally-forward trace updates.
    const Tensor* presynaptic = &frame;
    for (std::size_t l = 0; l < spec_.layers.size(); ++l) {
      const LayerSpec& layer = spec_.layers[l];
      LifState& state = states_[l];
      if (layer.is_spiking()) {
        const LayerParams& p = params[l];
        LayerTraces& t = traces_[l];
        // Threshold and leakage traces read U[t-1], s[t-1] before the step.
        if (learns_thresholds(mode)) {
          update_threshold_traces(t.threshold, state.spikes, p.leakage);
        }
        if (learns_leakage(mode)) {
          update_leakage_traces(t.leakage, state.potentials, state.spikes,
                                p.threshold_view(layer), p.leakage);
        }
        layer_forward(layer, p, *presynaptic, state, spec_.surrogate,
                      options_.spike_mode, forward_);
        update_weight_traces(t.weight, *presynaptic, p.leakage);
      } else {
        layer_forward(layer, params[l], *presynaptic, state, spec_.surrogate,
                      options_.spike_mode, forward_);
      }
      presynaptic = &state.spikes;
    }

    const Tensor& output = states_[out].spikes;
    outcome.loss += instant_loss(output.values(), target_.values(), loss);
    for (std::size_t j = 0; j < counts_.size(); ++j) counts_[j] += output[j];

    // Spatial backward within this time-step only.
    const LayerParams& top = params[out];
    output_error(output, target_, states_[out].potentials,
                 top.threshold_view(spec_.layers[out]), loss, spec_.surrogate,
                 deltas_[out]);
    ++stats_.output_error_evaluations;
    accumulate_gradients(acc.layers[out], spec_.layers[out], deltas_[out],
                         traces_[out], mode, conv_, options_.threshold_bypass);

    const Tensor* error = &deltas_[out];
    for (std::size_t l = out; l-- > lowest_spiking_;) {
      error_to_presynaptic(spec_.layers[l + 1], params[l + 1], *error,
                           spike_errors_[l], conv_);
      const LayerSpec& layer = spec_.layers[l];
      if (!layer.is_spiking()) {
        error = &spike_errors_[l];
        continue;
      }
      hidden_error(spike_errors_[l], states_[l].potentials,
                   params[l].threshold_view(layer), spec_.surrogate,
                   deltas_[l]);
      ++stats_.hidden_error_evaluations;
      accumulate_gradients(acc.layers[l], layer, deltas_[l], traces_[l], mode,
                           conv_, options_.threshold_bypass);
      error = &deltas_[l];
    }
    ++stats_.time_steps;
  }

  outcome.prediction = decode_counts(counts_);
  acc.samples += 1;
  acc.loss += outcome.loss;
  if (outcome.prediction == sample.label) acc.correct += 1;
  return outcome;
}

MemoryAudit StopLearner::retained() const {
  MemoryAudit audit;
  auto count = [&audit](const Tensor& t) {
    if (t.empty()) return;
    audit.tensors += 1;
    audit.values += t.size();
  };
  for (const LifState& s : states_) {
    count(s.potentials);
    count(s.spikes);
  }
  for (const LayerTraces& t : traces_) {
    count(t.weight);
    count(t.threshold);
    count(t.leakage);
  }
  for (const Tensor& d : deltas_) count(d);
  for (const Tensor& e : spike_errors_) count(e);
  count(target_);
  return audit;
}

GradAccumulator learn_sample(const NetworkSpec& spec,
                             const NetworkParams& params, const Sample& sample,
                             SynergyMode mode, LossKind loss,
                             LearnerOptions options) {
  StopLearner learner(spec, options);
  GradAccumulator acc(spec);
  learner.learn(params, sample, mode, loss, acc);
  return acc;
}

}  // namespace stop
