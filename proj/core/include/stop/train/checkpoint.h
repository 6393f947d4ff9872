#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "stop/topology/network.h"
#include "stop/train/config.h"
#include "stop/train/optimizer.h"

namespace stop {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  TrainConfig config;
  std::string digest;
  std::size_t epoch = 0;  // completed epochs
  NetworkParams params;
  OptimizerState optimizer;
  std::vector<nlohmann::ordered_json> history;  // metrics rows so far
};

// Little-endian IEEE-754 doubles, base64 encoded.
std::string encode_doubles(std::span<const double> values);
std::vector<double> decode_doubles(std::string_view text);

std::string serialize_checkpoint(const Checkpoint& checkpoint);
Checkpoint parse_checkpoint(std::string_view text);

// Writes to a sibling temporary file and renames it into place.
void write_atomic(const std::filesystem::path& path, std::string_view contents);

void save_checkpoint(const std::filesystem::path& path,
                     const Checkpoint& checkpoint);
// Throws CheckpointError for unreadable, corrupt or wrong-version files.
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Throws CheckpointError if the checkpoint was written under a different
// configuration.
void require_digest(const Checkpoint& checkpoint, const TrainConfig& config);

}  // namespace stop
