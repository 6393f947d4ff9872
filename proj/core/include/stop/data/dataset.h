#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "stop/data/sample.h"
#include "stop/numerics/tensor.h"
#include "stop/topology/network.h"

namespace stop {

// A labeled collection of encoded samples. Static images keep a single frame
// per sample (repeated over the T steps by direct coding); event data keeps
// one frame per step. Byte-valued images stay as bytes and are rescaled when
// a sample is materialized.
class Dataset {
 public:
  Dataset() = default;

  static Dataset from_bytes(Shape frame_shape, std::vector<std::uint8_t> pixels,
                            double max_value, std::vector<std::size_t> labels,
                            std::size_t num_classes, int time_steps);
  // `frames_per_sample` is 1 (static, repeated T times) or T.
  static Dataset from_frames(Shape frame_shape, std::vector<double> values,
                             std::size_t frames_per_sample,
                             std::vector<std::size_t> labels,
                             std::size_t num_classes, int time_steps);

  std::size_t size() const { return labels_.size(); }
  bool empty() const { return labels_.empty(); }
  std::size_t num_classes() const { return num_classes_; }
  const Shape& frame_shape() const { return frame_shape_; }
  int time_steps() const { return time_steps_; }
  std::size_t label(std::size_t i) const { return labels_.at(i); }
  const std::vector<std::size_t>& labels() const { return labels_; }
  std::size_t class_count(std::size_t label) const;

  Sample sample(std::size_t i) const;
  // Writes sample i into `out`, reusing its frame buffers.
  void fill(std::size_t i, Sample& out) const;

  Dataset subset(std::span<const std::size_t> indices) const;
  Dataset head(std::size_t n) const;

 private:
  Shape frame_shape_;
  std::size_t frame_size_ = 0;
  std::size_t frames_per_sample_ = 1;
  std::vector<std::uint8_t> bytes_;
  double max_value_ = 1.0;
  std::vector<double> values_;
  std::vector<std::size_t> labels_;
  std::size_t num_classes_ = 0;
  int time_steps_ = 1;
};

// MNIST-style IDX pair, direct-coded with max value 255 into 1 x rows x cols
// frames.
Dataset load_idx_dataset(const std::filesystem::path& images,
                         const std::filesystem::path& labels,
                         std::size_t num_classes, int time_steps);

// Event-stream dataset listed in a text file, one "path label" per line with
// paths relative to the list file. Every stream must share one sensor size.
Dataset load_event_dataset(const std::filesystem::path& list,
                           std::size_t num_classes, int time_steps,
                           bool normalize = true);

// Index batches over `count` samples: a seeded permutation (or the identity
// when shuffle is false) cut into batch_size runs plus a final short batch.
// Throws DataError for an empty dataset or a zero batch size.
std::vector<std::vector<std::size_t>> make_batches(std::size_t count,
                                                   std::size_t batch_size,
                                                   std::uint64_t seed,
                                                   bool shuffle = true);

struct SyntheticTask {
  Dataset data;
  NetworkParams teacher;
  std::size_t attempts = 0;
};

// A frozen random network of architecture `spec` labels uniform [0, 1]
// inputs by its decoded prediction. Only inputs with a strict winner are
// kept, and each class is filled to an equal quota; a teacher that cannot
// fill its quotas within the draw budget is replaced by a fresh one.
// Throws DataError after `max_attempts` teachers.
SyntheticTask synthetic_teacher(const NetworkSpec& spec, std::uint64_t seed,
                                std::size_t samples,
                                std::size_t max_attempts = 100);

}  // namespace stop
