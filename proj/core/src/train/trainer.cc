#include "stop/train/trainer.h"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

#include "stop/error.h"
#include "stop/learn/learner.h"
#include "stop/oracle/oracle.h"

namespace stop {

using nlohmann::ordered_json;

TrainData prepare_data(const TrainConfig& config) {
  config.validate();
  TrainData data;
  const int T = config.time_steps;
  if (config.dataset == "idx") {
    data.train = load_idx_dataset(config.train_images, config.train_labels,
                                  config.num_classes, T);
    data.test = load_idx_dataset(config.test_images, config.test_labels,
                                 config.num_classes, T);
  } else if (config.dataset == "events") {
    data.train = load_event_dataset(config.train_events, config.num_classes,
                                    T, config.normalize_events);
    data.test = load_event_dataset(config.test_events, config.num_classes, T,
                                   config.normalize_events);
  }
  const Shape input = config.dataset == "synthetic"
                          ? Shape(config.input_shape)
                          : data.train.frame_shape();
  try {
    data.spec = parse_architecture(config.architecture, input,
                                   config.num_classes);
  } catch (const ParseError& e) {
    throw ConfigError(std::string("architecture: ") + e.what());
  }
  data.spec.time_steps = T;
  data.spec.surrogate = config.surrogate_kind();

  if (config.dataset == "synthetic") {
    const SyntheticTask task = synthetic_teacher(
        data.spec, config.seed, config.synthetic_train + config.synthetic_test);
    std::vector<std::size_t> train_idx, test_idx;
    for (std::size_t i = 0; i < task.data.size(); ++i) {
      (i < config.synthetic_train ? train_idx : test_idx).push_back(i);
    }
    data.train = task.data.subset(train_idx);
    data.test = task.data.subset(test_idx);
  }
  if (config.train_limit > 0) data.train = data.train.head(config.train_limit);
  if (config.test_limit > 0) data.test = data.test.head(config.test_limit);
  if (data.test.frame_shape() != data.train.frame_shape() &&
      !data.test.empty()) {
    throw DataError("train and test frames differ in shape");
  }
  return data;
}

EvalResult evaluate(const NetworkSpec& spec, const NetworkParams& params,
                    const Dataset& data, LossKind loss) {
  if (data.empty()) throw DataError("evaluate: empty dataset");
  NetworkState states = reset_network(spec);
  ForwardScratch scratch;
  Sample sample;
  std::vector<double> counts(spec.num_classes);
  Tensor target({spec.num_classes});
  std::size_t correct = 0;
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    data.fill(i, sample);
    for (LifState& s : states) {
      s.potentials.fill(0.0);
      s.spikes.fill(0.0);
    }
    std::fill(counts.begin(), counts.end(), 0.0);
    target.fill(0.0);
    target[sample.label] = 1.0;
    for (const Tensor& frame : sample.frames) {
      const Tensor& out =
          forward_timestep(spec, params, states, frame, SpikeMode::kHard,
                           scratch);
      total += instant_loss(out.values(), target.values(), loss);
      for (std::size_t j = 0; j < counts.size(); ++j) counts[j] += out[j];
    }
    if (decode_counts(counts) == sample.label) ++correct;
  }
  const double n = static_cast<double>(data.size());
  return {static_cast<double>(correct) / n, total / n, data.size()};
}

std::uint64_t epoch_seed(std::uint64_t seed, std::size_t epoch) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(epoch), 0x5eedu};
  std::mt19937_64 rng(seq);
  return rng();
}

std::string metrics_jsonl(const std::vector<ordered_json>& rows) {
  std::string out;
  for (const ordered_json& row : rows) out += row.dump() + "\n";
  return out;
}

std::string metrics_csv(const std::vector<ordered_json>& rows) {
  std::ostringstream out;
  if (rows.empty()) return {};
  bool first = true;
  for (const auto& [key, value] : rows.front().items()) {
    out << (first ? "" : ",") << key;
    first = false;
  }
  out << '\n';
  for (const ordered_json& row : rows) {
    first = true;
    for (const auto& [key, value] : row.items()) {
      out << (first ? "" : ",") << value.dump();
      first = false;
    }
    out << '\n';
  }
  return out.str();
}

namespace {

std::filesystem::path csv_path(const std::filesystem::path& metrics) {
  std::filesystem::path p = metrics;
  p.replace_extension(".csv");
  return p;
}

void write_metrics(const TrainConfig& config,
                   const std::vector<ordered_json>& rows) {
  if (config.metrics.empty()) return;
  write_atomic(config.metrics, metrics_jsonl(rows));
  write_atomic(csv_path(config.metrics), metrics_csv(rows));
}

// Spreads parameter-space gradients evenly over the neuron grid.
void add_parameter_gradients(GradAccumulator& acc, const NetworkSpec& spec,
                             const NetworkParams& grads) {
  for (std::size_t l = 0; l < spec.layers.size(); ++l) {
    const LayerSpec& layer = spec.layers[l];
    if (!layer.is_spiking()) continue;
    LayerGradients& g = acc.layers[l];
    for (std::size_t i = 0; i < g.weights.size(); ++i) {
      g.weights[i] += grads[l].weights[i];
    }
    const std::size_t group = layer.threshold_group();
    const std::size_t n = layer.neuron_count();
    for (std::size_t j = 0; j < n; ++j) {
      g.thresholds[j] +=
          grads[l].thresholds[j / group] / static_cast<double>(group);
      g.leakages[j] += grads[l].leakage / static_cast<double>(n);
    }
  }
}

bool all_finite(const NetworkParams& params) {
  for (const LayerParams& p : params) {
    if (!p.weights.all_finite() || !p.thresholds.all_finite() ||
        !std::isfinite(p.leakage)) {
      return false;
    }
  }
  return true;
}

}  // namespace

TrainResult train(const TrainConfig& config, const TrainData& data,
                  const TrainHooks& hooks) {
  config.validate();
  const NetworkSpec& spec = data.spec;
  if (data.train.empty()) throw DataError("train: empty training set");

  TrainResult result;
  result.spec = spec;
  std::size_t start = 0;
  if (hooks.resume) {
    require_digest(*hooks.resume, config);
    result.params = hooks.resume->params;
    result.optimizer = hooks.resume->optimizer;
    result.history = hooks.resume->history;
    start = hooks.resume->epoch;
  } else {
    result.params = hooks.initial_params
                        ? *hooks.initial_params
                        : init_params(spec, config.seed, config.init_mode());
    result.optimizer = OptimizerState::zeros(result.params);
  }
  if (result.params.size() != spec.layers.size()) {
    throw ShapeError("train: parameters do not match the architecture");
  }

  const SynergyMode mode = config.synergy_mode();
  const LossKind loss = config.loss_kind();
  const bool use_stbp = config.rule == "stbp";
  StopLearner learner(spec);
  GradAccumulator acc(spec);
  Sample sample;
  const std::string digest = config_digest(config);

  write_metrics(config, result.history);
  std::size_t ran = 0;
  for (std::size_t epoch = start; epoch < config.epochs; ++epoch) {
    if (hooks.stop_after > 0 && ran == hooks.stop_after) break;
    const auto began = std::chrono::steady_clock::now();
    const LearningRates rates =
        scheduled_rates(config.rates(), epoch, config.epochs);
    const StepOptions step{rates, config.momentum, config.momentum_all, mode,
                           config.update_options()};
    const auto batches = make_batches(data.train.size(), config.batch_size,
                                      epoch_seed(config.seed, epoch));
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t b = 0; b < batches.size(); ++b) {
      acc.reset();
      for (std::size_t i : batches[b]) {
        data.train.fill(i, sample);
        if (use_stbp) {
          const oracle::StbpResult r = oracle::unrolled_stbp(
              spec, result.params, sample, loss, true, SpikeMode::kHard);
          add_parameter_gradients(acc, spec, r.gradients);
          acc.samples += 1;
          acc.loss += r.loss;
          if (r.prediction == sample.label) acc.correct += 1;
        } else {
          learner.learn(result.params, sample, mode, loss, acc);
        }
      }
      if (!std::isfinite(acc.loss)) {
        throw NumericError("non-finite training loss in epoch " +
                           std::to_string(epoch + 1) + ", batch " +
                           std::to_string(b + 1));
      }
      loss_sum += acc.loss;
      correct += acc.correct;
      optimizer_step(result.params, result.optimizer, spec, acc, step,
                     batches[b].size());
      if (hooks.on_progress && hooks.progress_every > 0 &&
          (b + 1) % hooks.progress_every == 0) {
        hooks.on_progress(epoch + 1, b + 1, batches.size());
      }
    }
    if (!all_finite(result.params)) {
      throw NumericError("non-finite parameter after epoch " +
                         std::to_string(epoch + 1));
    }
    result.optimizer.epoch = epoch + 1;

    const double n = static_cast<double>(data.train.size());
    const EvalResult test = data.test.empty()
                                ? EvalResult{}
                                : evaluate(spec, result.params, data.test, loss);
    ordered_json row;
    row["epoch"] = epoch + 1;
    row["train_loss"] = loss_sum / n;
    row["train_acc"] = static_cast<double>(correct) / n;
    row["test_loss"] = test.mean_loss;
    row["test_acc"] = test.accuracy;
    if (config.record_time) {
      row["wall_seconds"] = std::chrono::duration<double>(
                                std::chrono::steady_clock::now() - began)
                                .count();
    }
    row["lr_weight"] = rates.weight;
    row["lr_threshold"] = rates.threshold;
    row["lr_leakage"] = rates.leakage;
    result.history.push_back(row);

    write_metrics(config, result.history);
    if (!config.checkpoint.empty()) {
      save_checkpoint(config.checkpoint,
                      Checkpoint{config, digest, epoch + 1, result.params,
                                 result.optimizer, result.history});
    }
    if (hooks.on_epoch) hooks.on_epoch(row);
    ++ran;
  }
  return result;
}

TrainResult train(const TrainConfig& config, const TrainHooks& hooks) {
  return train(config, prepare_data(config), hooks);
}

}  // namespace stop
