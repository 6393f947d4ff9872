#include "stop/train/config.h"

#include <openssl/evp.h>

#include <array>
#include <cmath>
#include <fstream>
#include <set>

#include "stop/error.h"

namespace stop {

using nlohmann::json;

namespace {

constexpr std::array kOutputKeys = {"checkpoint", "metrics", "record_time"};

}  // namespace

void TrainConfig::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError(what); };
  try {
    (void)synergy_mode();
    (void)loss_kind();
    (void)surrogate_kind();
    (void)init_mode();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    fail(e.what());
  }
  if (dataset != "idx" && dataset != "events" && dataset != "synthetic") {
    fail("dataset must be idx, events or synthetic, got '" + dataset + "'");
  }
  if (rule != "stop" && rule != "stbp") {
    fail("rule must be stop or stbp, got '" + rule + "'");
  }
  if (time_steps < 1) fail("time_steps must be at least 1");
  if (num_classes < 1) fail("num_classes must be at least 1");
  if (batch_size < 1) fail("batch_size must be at least 1");
  const SynergyMode m = synergy_mode();
  for (double rate : {lr_weight, lr_threshold, lr_leakage}) {
    if (!std::isfinite(rate) || rate < 0.0) {
      fail("learning rates must be finite and non-negative");
    }
  }
  if (learns_thresholds(m) && lr_threshold <= 0.0) {
    fail("lr_threshold must be positive for mode " + mode);
  }
  if (learns_leakage(m) && lr_leakage <= 0.0) {
    fail("lr_leakage must be positive for mode " + mode);
  }
  if (!(momentum >= 0.0 && momentum < 1.0)) fail("momentum must be in [0, 1)");
  if (!(weight_decay >= 0.0)) fail("weight_decay must be non-negative");
  if (!(threshold_floor > 0.0)) fail("threshold_floor must be positive");
  if (dataset == "synthetic" && input_shape.empty()) {
    fail("input_shape is required for synthetic data");
  }
}

json to_json(const TrainConfig& c) {
  return json{
      {"architecture", c.architecture},
      {"dataset", c.dataset},
      {"train_images", c.train_images},
      {"train_labels", c.train_labels},
      {"test_images", c.test_images},
      {"test_labels", c.test_labels},
      {"train_events", c.train_events},
      {"test_events", c.test_events},
      {"normalize_events", c.normalize_events},
      {"input_shape", c.input_shape},
      {"num_classes", c.num_classes},
      {"train_limit", c.train_limit},
      {"test_limit", c.test_limit},
      {"synthetic_train", c.synthetic_train},
      {"synthetic_test", c.synthetic_test},
      {"time_steps", c.time_steps},
      {"mode", c.mode},
      {"loss", c.loss},
      {"surrogate", c.surrogate},
      {"rule", c.rule},
      {"lr_weight", c.lr_weight},
      {"lr_threshold", c.lr_threshold},
      {"lr_leakage", c.lr_leakage},
      {"weight_decay", c.weight_decay},
      {"momentum", c.momentum},
      {"momentum_all", c.momentum_all},
      {"epochs", c.epochs},
      {"batch_size", c.batch_size},
      {"seed", c.seed},
      {"init", c.init},
      {"threshold_floor", c.threshold_floor},
      {"checkpoint", c.checkpoint},
      {"metrics", c.metrics},
      {"record_time", c.record_time},
  };
}

namespace {

template <typename T>
void read_field(const json& j, const char* key, T& field) {
  if (!j.contains(key)) return;
  try {
    field = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field '") + key + "': " + e.what());
  }
}

}  // namespace

TrainConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  TrainConfig c;
  const json defaults = to_json(c);
  for (const auto& [key, value] : j.items()) {
    if (!defaults.contains(key)) {
      throw ConfigError("unknown config field '" + key + "'");
    }
  }
  read_field(j, "architecture", c.architecture);
  read_field(j, "dataset", c.dataset);
  read_field(j, "train_images", c.train_images);
  read_field(j, "train_labels", c.train_labels);
  read_field(j, "test_images", c.test_images);
  read_field(j, "test_labels", c.test_labels);
  read_field(j, "train_events", c.train_events);
  read_field(j, "test_events", c.test_events);
  read_field(j, "normalize_events", c.normalize_events);
  read_field(j, "input_shape", c.input_shape);
  read_field(j, "num_classes", c.num_classes);
  read_field(j, "train_limit", c.train_limit);
  read_field(j, "test_limit", c.test_limit);
  read_field(j, "synthetic_train", c.synthetic_train);
  read_field(j, "synthetic_test", c.synthetic_test);
  read_field(j, "time_steps", c.time_steps);
  read_field(j, "mode", c.mode);
  read_field(j, "loss", c.loss);
  read_field(j, "surrogate", c.surrogate);
  read_field(j, "rule", c.rule);
  read_field(j, "lr_weight", c.lr_weight);
  read_field(j, "lr_threshold", c.lr_threshold);
  read_field(j, "lr_leakage", c.lr_leakage);
  read_field(j, "weight_decay", c.weight_decay);
  read_field(j, "momentum", c.momentum);
  read_field(j, "momentum_all", c.momentum_all);
  read_field(j, "epochs", c.epochs);
  read_field(j, "batch_size", c.batch_size);
  read_field(j, "seed", c.seed);
  read_field(j, "init", c.init);
  read_field(j, "threshold_floor", c.threshold_floor);
  read_field(j, "checkpoint", c.checkpoint);
  read_field(j, "metrics", c.metrics);
  read_field(j, "record_time", c.record_time);
  return c;
}

TrainConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  const json defaults = to_json(TrainConfig{});
  for (const auto& [key, value] : defaults.items()) {
    keys.push_back(key);
  }
  return keys;
}

void apply_override(TrainConfig& config, const std::string& key,
                    const std::string& value) {
  json j = to_json(config);
  if (!j.contains(key)) throw ConfigError("unknown config field '" + key + "'");
  json& field = j[key];
  try {
    if (field.is_string()) {
      field = value;
    } else if (field.is_boolean()) {
      if (value == "true" || value == "1") {
        field = true;
      } else if (value == "false" || value == "0") {
        field = false;
      } else {
        throw ConfigError("'" + key + "' expects true or false");
      }
    } else {
      // Numbers and arrays: accept their JSON spelling.
      field = json::parse(value);
    }
  } catch (const json::parse_error&) {
    throw ConfigError("cannot parse '" + value + "' for '" + key + "'");
  }
  config = config_from_json(j);
}

std::string config_digest(const TrainConfig& config) {
  json j = to_json(config);
  for (const char* key : kOutputKeys) j.erase(key);
  const std::string canonical = j.dump();
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(canonical.data(), canonical.size(), md.data(), &len,
                 EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex += kHex[md[i] >> 4];
    hex += kHex[md[i] & 0xf];
  }
  return hex;
}

}  // namespace stop
