#include "stop/data/dataset.h"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "stop/data/events.h"
#include "stop/data/idx.h"
#include "stop/error.h"

namespace stop {

namespace {

void check_labels(const std::vector<std::size_t>& labels,
                  std::size_t num_classes) {
  if (num_classes == 0) throw DataError("dataset: zero classes");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= num_classes) {
      throw DataError("sample " + std::to_string(i) + ": label " +
                      std::to_string(labels[i]) + " outside " +
                      std::to_string(num_classes) + " classes");
    }
  }
}

}  // namespace

Dataset Dataset::from_bytes(Shape frame_shape,
                            std::vector<std::uint8_t> pixels,
                            double max_value, std::vector<std::size_t> labels,
                            std::size_t num_classes, int time_steps) {
  if (time_steps < 1) throw DataError("dataset: T must be at least 1");
  if (!(max_value > 0.0)) throw DataError("dataset: max value must be > 0");
  check_labels(labels, num_classes);
  Dataset d;
  d.frame_shape_ = std::move(frame_shape);
  d.frame_size_ = shape_size(d.frame_shape_);
  if (pixels.size() != d.frame_size_ * labels.size()) {
    throw DataError("dataset: pixel count does not match the sample count");
  }
  for (std::uint8_t p : pixels) {
    if (p > max_value) {
      throw DataError("dataset: pixel value above the declared maximum");
    }
  }
  d.bytes_ = std::move(pixels);
  d.max_value_ = max_value;
  d.labels_ = std::move(labels);
  d.num_classes_ = num_classes;
  d.time_steps_ = time_steps;
  return d;
}

Dataset Dataset::from_frames(Shape frame_shape, std::vector<double> values,
                             std::size_t frames_per_sample,
                             std::vector<std::size_t> labels,
                             std::size_t num_classes, int time_steps) {
  if (time_steps < 1) throw DataError("dataset: T must be at least 1");
  if (frames_per_sample != 1 &&
      frames_per_sample != static_cast<std::size_t>(time_steps)) {
    throw DataError("dataset: frames per sample must be 1 or T");
  }
  check_labels(labels, num_classes);
  Dataset d;
  d.frame_shape_ = std::move(frame_shape);
  d.frame_size_ = shape_size(d.frame_shape_);
  if (values.size() != d.frame_size_ * frames_per_sample * labels.size()) {
    throw DataError("dataset: value count does not match the sample count");
  }
  d.frames_per_sample_ = frames_per_sample;
  d.values_ = std::move(values);
  d.labels_ = std::move(labels);
  d.num_classes_ = num_classes;
  d.time_steps_ = time_steps;
  return d;
}

std::size_t Dataset::class_count(std::size_t label) const {
  return static_cast<std::size_t>(
      std::count(labels_.begin(), labels_.end(), label));
}

Sample Dataset::sample(std::size_t i) const {
  Sample s;
  fill(i, s);
  return s;
}

void Dataset::fill(std::size_t i, Sample& out) const {
  if (i >= size()) throw DataError("dataset: sample index out of range");
  const auto steps = static_cast<std::size_t>(time_steps_);
  if (out.frames.size() != steps) out.frames.assign(steps, Tensor());
  for (std::size_t t = 0; t < steps; ++t) {
    Tensor& frame = out.frames[t];
    if (frame.shape() != frame_shape_) frame = Tensor(frame_shape_);
    std::span<double> dst = frame.values();
    if (!bytes_.empty()) {
      const std::uint8_t* src = bytes_.data() + i * frame_size_;
      const double scale = 1.0 / max_value_;
      for (std::size_t k = 0; k < frame_size_; ++k) dst[k] = src[k] * scale;
    } else {
      const std::size_t f = frames_per_sample_ == 1 ? 0 : t;
      const double* src =
          values_.data() + (i * frames_per_sample_ + f) * frame_size_;
      std::copy(src, src + frame_size_, dst.begin());
    }
  }
  out.label = labels_[i];
  out.num_classes = num_classes_;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset d;
  d.frame_shape_ = frame_shape_;
  d.frame_size_ = frame_size_;
  d.frames_per_sample_ = frames_per_sample_;
  d.max_value_ = max_value_;
  d.num_classes_ = num_classes_;
  d.time_steps_ = time_steps_;
  const std::size_t stride = frame_size_ * frames_per_sample_;
  for (std::size_t i : indices) {
    if (i >= size()) throw DataError("dataset: subset index out of range");
    d.labels_.push_back(labels_[i]);
    if (!bytes_.empty()) {
      d.bytes_.insert(d.bytes_.end(), bytes_.begin() + i * frame_size_,
                      bytes_.begin() + (i + 1) * frame_size_);
    } else {
      d.values_.insert(d.values_.end(), values_.begin() + i * stride,
                       values_.begin() + (i + 1) * stride);
    }
  }
  return d;
}

Dataset Dataset::head(std::size_t n) const {
  std::vector<std::size_t> idx(std::min(n, size()));
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return subset(idx);
}

Dataset load_idx_dataset(const std::filesystem::path& images,
                         const std::filesystem::path& labels,
                         std::size_t num_classes, int time_steps) {
  IdxImageSet set = load_idx(images, labels);
  return Dataset::from_bytes({1, set.rows, set.cols}, std::move(set.pixels),
                             255.0, std::move(set.labels), num_classes,
                             time_steps);
}

Dataset load_event_dataset(const std::filesystem::path& list,
                           std::size_t num_classes, int time_steps,
                           bool normalize) {
  std::ifstream in(list);
  if (!in) throw DataError("cannot open " + list.string());
  const std::filesystem::path root = list.parent_path();
  Shape shape;
  std::vector<double> values;
  std::vector<std::size_t> labels;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string rel;
    long long label = -1;
    if (!(fields >> rel >> label) || label < 0) {
      throw DataError(list.string() + ": expected \"path label\" lines");
    }
    const SlicedEvents sliced =
        slice_events(load_events(root / rel), time_steps, normalize);
    if (shape.empty()) shape = sliced.frames.front().shape();
    if (sliced.frames.front().shape() != shape) {
      throw DataError(rel + ": sensor size differs from earlier streams");
    }
    for (const Tensor& f : sliced.frames) {
      values.insert(values.end(), f.values().begin(), f.values().end());
    }
    labels.push_back(static_cast<std::size_t>(label));
  }
  if (labels.empty()) throw DataError(list.string() + ": no streams listed");
  return Dataset::from_frames(shape, std::move(values),
                              static_cast<std::size_t>(time_steps),
                              std::move(labels), num_classes, time_steps);
}

std::vector<std::vector<std::size_t>> make_batches(std::size_t count,
                                                   std::size_t batch_size,
                                                   std::uint64_t seed,
                                                   bool shuffle) {
  if (count == 0) throw DataError("make_batches: empty dataset");
  if (batch_size == 0) throw DataError("make_batches: batch size is zero");
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (shuffle) {
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
  }
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < count; start += batch_size) {
    const std::size_t end = std::min(count, start + batch_size);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

SyntheticTask synthetic_teacher(const NetworkSpec& spec, std::uint64_t seed,
                                std::size_t samples,
                                std::size_t max_attempts) {
  spec.validate();
  const std::size_t classes = spec.num_classes;
  if (samples < classes) {
    throw DataError("synthetic_teacher: fewer samples than classes");
  }
  const std::size_t frame_size = shape_size(spec.input_shape);
  const std::size_t budget = 50 * samples;
  std::mt19937_64 master(seed);

  for (std::size_t attempt = 1; attempt <= max_attempts; ++attempt) {
    SyntheticTask task;
    task.teacher = init_params(spec, master());
    task.attempts = attempt;
    std::mt19937_64 rng(master());
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    std::vector<std::size_t> quota(classes, samples / classes);
    for (std::size_t c = 0; c < samples % classes; ++c) quota[c] += 1;
    std::vector<double> values;
    std::vector<std::size_t> labels;
    values.reserve(samples * frame_size);

    Tensor frame(spec.input_shape);
    ForwardScratch scratch;
    std::vector<double> counts(classes);
    for (std::size_t draw = 0; draw < budget && labels.size() < samples;
         ++draw) {
      for (double& v : frame.values()) v = uniform(rng);
      NetworkState states = reset_network(spec);
      std::fill(counts.begin(), counts.end(), 0.0);
      for (int t = 0; t < spec.time_steps; ++t) {
        const Tensor& out = forward_timestep(spec, task.teacher, states, frame,
                                             SpikeMode::kHard, scratch);
        for (std::size_t j = 0; j < classes; ++j) counts[j] += out[j];
      }
      const std::size_t label = decode_counts(counts);
      const double best = counts[label];
      const bool strict =
          std::count(counts.begin(), counts.end(), best) == 1;
      if (!strict || quota[label] == 0) continue;
      quota[label] -= 1;
      values.insert(values.end(), frame.values().begin(),
                    frame.values().end());
      labels.push_back(label);
    }
    if (labels.size() == samples) {
      const Dataset ordered = Dataset::from_frames(
          spec.input_shape, std::move(values), 1, std::move(labels), classes,
          spec.time_steps);
      std::vector<std::size_t> order(samples);
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::shuffle(order.begin(), order.end(), rng);
      task.data = ordered.subset(order);
      return task;
    }
  }
  throw DataError("synthetic_teacher: no balanced labeling after " +
                  std::to_string(max_attempts) + " teachers");
}

}  // namespace stop
