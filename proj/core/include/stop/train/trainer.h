#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "stop/data/dataset.h"
#include "stop/topology/network.h"
#include "stop/train/checkpoint.h"
#include "stop/train/config.h"
#include "stop/train/optimizer.h"

namespace stop {

struct TrainData {
  NetworkSpec spec;
  Dataset train;
  Dataset test;
};

// Loads (or generates) the datasets named by the config and parses the
// architecture against their frame shape.
TrainData prepare_data(const TrainConfig& config);

struct EvalResult {
  double accuracy = 0.0;
  double mean_loss = 0.0;
  std::size_t samples = 0;
};

// Hard-mode presentation of every sample; throws DataError when empty.
EvalResult evaluate(const NetworkSpec& spec, const NetworkParams& params,
                    const Dataset& data, LossKind loss);

struct TrainHooks {
  std::function<void(const nlohmann::ordered_json& row)> on_epoch;
  // Called every `progress_every` batches with (epoch, batch, batches).
  std::function<void(std::size_t, std::size_t, std::size_t)> on_progress;
  std::size_t progress_every = 0;
  // Stop after this many epochs of this invocation (0 runs to the end).
  std::size_t stop_after = 0;
  std::optional<Checkpoint> resume;
  // Replaces the config-derived initial parameters when set.
  std::optional<NetworkParams> initial_params;
};

struct TrainResult {
  NetworkSpec spec;
  NetworkParams params;
  OptimizerState optimizer;
  std::vector<nlohmann::ordered_json> history;
};

// Epochs of shuffled mini-batches: per-sample learning into a batch
// accumulator, then one optimizer step with cosine-annealed rates. After
// every epoch the metrics files are rewritten and a checkpoint is saved.
// Throws NumericError on a non-finite loss or parameter; the checkpoint of
// the last finite epoch is left in place.
TrainResult train(const TrainConfig& config, const TrainData& data,
                  const TrainHooks& hooks = {});
TrainResult train(const TrainConfig& config, const TrainHooks& hooks = {});

// Shuffle seed of one epoch, independent of how many epochs ran before.
std::uint64_t epoch_seed(std::uint64_t seed, std::size_t epoch);

std::string metrics_csv(const std::vector<nlohmann::ordered_json>& rows);
std::string metrics_jsonl(const std::vector<nlohmann::ordered_json>& rows);

}  // namespace stop
