#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stop/learn/rule.h"
#include "stop/lif/lif.h"
#include "stop/topology/network.h"

namespace stop {

// Everything a training run depends on. Serialized as a flat JSON object
// whose keys double as CLI flag names.
struct TrainConfig {
  std::string architecture = "32-10";

  // Data: "idx", "events" or "synthetic".
  std::string dataset = "synthetic";
  std::string train_images;
  std::string train_labels;
  std::string test_images;
  std::string test_labels;
  std::string train_events;  // list file of "path label" lines
  std::string test_events;
  bool normalize_events = true;
  std::vector<std::size_t> input_shape = {16};  // synthetic only
  std::size_t num_classes = 10;
  std::size_t train_limit = 0;  // 0 keeps every sample
  std::size_t test_limit = 0;
  std::size_t synthetic_train = 500;
  std::size_t synthetic_test = 200;

  int time_steps = 6;
  std::string mode = "wtl";
  std::string loss = "ce";
  std::string surrogate = "expabs";
  // "stop" trains with the streaming rule; "stbp" with the unrolled
  // reverse-mode baseline including the illusory reset path.
  std::string rule = "stop";

  double lr_weight = 1e-2;
  double lr_threshold = 1e-4;
  double lr_leakage = 1e-4;
  double weight_decay = 0.0;
  double momentum = 0.9;
  bool momentum_all = false;  // also apply momentum to thresholds and leakage
  std::size_t epochs = 20;
  std::size_t batch_size = 32;
  std::uint64_t seed = 1;
  std::string init = "fan_in";
  double threshold_floor = kDefaultThresholdFloor;

  std::string checkpoint;  // written after every epoch when set
  std::string metrics;     // JSONL path; a CSV mirror sits next to it
  bool record_time = true;  // wall_seconds column; off for byte-stable logs

  // Throws ConfigError for out-of-range values or unknown enum names.
  void validate() const;

  SynergyMode synergy_mode() const { return parse_synergy_mode(mode); }
  LossKind loss_kind() const { return parse_loss(loss); }
  SurrogateKind surrogate_kind() const { return parse_surrogate(surrogate); }
  InitMode init_mode() const { return parse_init_mode(init); }
  LearningRates rates() const { return {lr_weight, lr_threshold, lr_leakage}; }
  UpdateOptions update_options() const {
    return {weight_decay, threshold_floor};
  }
};

nlohmann::json to_json(const TrainConfig& config);
// Throws ConfigError on unknown keys. Missing keys keep their defaults.
TrainConfig config_from_json(const nlohmann::json& j);
TrainConfig load_config(const std::filesystem::path& path);

// Applies `--key value` style overrides; the value is parsed according to
// the type of the existing field.
void apply_override(TrainConfig& config, const std::string& key,
                    const std::string& value);
std::vector<std::string> config_keys();

// SHA-256 of the canonical JSON of every field except output paths.
std::string config_digest(const TrainConfig& config);

}  // namespace stop
