#include "stop/train/checkpoint.h"

#include <openssl/evp.h>

#include <bit>
#include <cstdint>
#include <fstream>
#include <sstream>

#include "stop/error.h"

namespace stop {

using nlohmann::json;
using nlohmann::ordered_json;

std::string encode_doubles(std::span<const double> values) {
  std::vector<unsigned char> bytes;
  bytes.reserve(values.size() * 8);
  for (double v : values) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) {
      bytes.push_back(static_cast<unsigned char>(bits >> (8 * b)));
    }
  }
  if (bytes.empty()) return {};
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                bytes.data(), static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::vector<double> decode_doubles(std::string_view text) {
  if (text.empty()) return {};
  if (text.size() % 4 != 0) {
    throw CheckpointError("corrupt array: base64 length not a multiple of 4");
  }
  std::vector<unsigned char> bytes(text.size() / 4 * 3);
  const int n = EVP_DecodeBlock(
      bytes.data(), reinterpret_cast<const unsigned char*>(text.data()),
      static_cast<int>(text.size()));
  if (n < 0) throw CheckpointError("corrupt array: invalid base64");
  std::size_t size = static_cast<std::size_t>(n);
  // EVP_DecodeBlock keeps the zero bytes produced by '=' padding.
  if (text.back() == '=') --size;
  if (text.size() >= 2 && text[text.size() - 2] == '=') --size;
  if (size % 8 != 0) {
    throw CheckpointError("corrupt array: byte count not a multiple of 8");
  }
  std::vector<double> values(size / 8);
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) {
      bits |= std::uint64_t{bytes[i * 8 + static_cast<std::size_t>(b)]}
              << (8 * b);
    }
    values[i] = std::bit_cast<double>(bits);
  }
  return values;
}

namespace {

ordered_json tensor_json(const Tensor& t) {
  return ordered_json{{"shape", t.shape()}, {"data", encode_doubles(t.values())}};
}

Tensor tensor_from(const ordered_json& j) {
  Shape shape = j.at("shape").get<Shape>();
  std::vector<double> data = decode_doubles(j.at("data").get<std::string>());
  if (data.size() != shape_size(shape)) {
    throw CheckpointError("corrupt tensor: " + std::to_string(data.size()) +
                          " values for shape " + shape_string(shape));
  }
  return Tensor(std::move(shape), std::move(data));
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& c) {
  ordered_json layers = ordered_json::array();
  for (std::size_t l = 0; l < c.params.size(); ++l) {
    const double leak[] = {c.params[l].leakage};
    const double leak_v[] = {c.optimizer.leakage_velocity.at(l)};
    layers.push_back(ordered_json{
        {"weights", tensor_json(c.params[l].weights)},
        {"thresholds", tensor_json(c.params[l].thresholds)},
        {"leakage", encode_doubles(leak)},
        {"velocity", tensor_json(c.optimizer.velocity.at(l))},
        {"threshold_velocity",
         tensor_json(c.optimizer.threshold_velocity.at(l))},
        {"leakage_velocity", encode_doubles(leak_v)},
    });
  }
  ordered_json history = ordered_json::array();
  for (const ordered_json& row : c.history) history.push_back(row);
  ordered_json root{
      {"format", "stop-checkpoint"},
      {"version", kCheckpointVersion},
      {"config_digest", c.digest},
      {"epoch", c.epoch},
      {"optimizer_epoch", c.optimizer.epoch},
      {"config", ordered_json::parse(to_json(c.config).dump())},
      {"layers", layers},
      {"history", history},
  };
  return root.dump(1) + "\n";
}

Checkpoint parse_checkpoint(std::string_view text) {
  ordered_json root;
  try {
    root = ordered_json::parse(text);
  } catch (const json::parse_error& e) {
    throw CheckpointError(std::string("corrupt checkpoint: ") + e.what());
  }
  try {
    if (root.at("format") != "stop-checkpoint") {
      throw CheckpointError("not a checkpoint file");
    }
    const int version = root.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw CheckpointError("checkpoint version " + std::to_string(version) +
                            " is not supported (expected " +
                            std::to_string(kCheckpointVersion) + ")");
    }
    Checkpoint c;
    c.config = config_from_json(json::parse(root.at("config").dump()));
    c.digest = root.at("config_digest").get<std::string>();
    c.epoch = root.at("epoch").get<std::size_t>();
    c.optimizer.epoch = root.at("optimizer_epoch").get<std::size_t>();
    for (const ordered_json& layer : root.at("layers")) {
      LayerParams p;
      p.weights = tensor_from(layer.at("weights"));
      p.thresholds = tensor_from(layer.at("thresholds"));
      const auto leak = decode_doubles(layer.at("leakage").get<std::string>());
      const auto leak_v =
          decode_doubles(layer.at("leakage_velocity").get<std::string>());
      if (leak.size() != 1 || leak_v.size() != 1) {
        throw CheckpointError("corrupt checkpoint: leakage entry");
      }
      p.leakage = leak[0];
      c.params.push_back(std::move(p));
      c.optimizer.velocity.push_back(tensor_from(layer.at("velocity")));
      c.optimizer.threshold_velocity.push_back(
          tensor_from(layer.at("threshold_velocity")));
      c.optimizer.leakage_velocity.push_back(leak_v[0]);
    }
    for (const ordered_json& row : root.at("history")) {
      c.history.push_back(row);
    }
    return c;
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("corrupt checkpoint: ") + e.what());
  } catch (const ConfigError& e) {
    throw CheckpointError(std::string("corrupt checkpoint config: ") +
                          e.what());
  }
}

void write_atomic(const std::filesystem::path& path,
                  std::string_view contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error("cannot rename " + tmp.string() + ": " + ec.message());
}

void save_checkpoint(const std::filesystem::path& path,
                     const Checkpoint& checkpoint) {
  write_atomic(path, serialize_checkpoint(checkpoint));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_checkpoint(buffer.str());
}

void require_digest(const Checkpoint& checkpoint, const TrainConfig& config) {
  const std::string expected = config_digest(config);
  if (checkpoint.digest != expected) {
    throw CheckpointError("checkpoint was written for config digest " +
                          checkpoint.digest + ", current config is " +
                          expected);
  }
}

}  // namespace stop
