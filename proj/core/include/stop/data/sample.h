#pragma once

#include <cstddef>
#include <vector>

#include "stop/numerics/tensor.h"

namespace stop {

// One presentation: T input frames with values in [0, 1] and a class label.
struct Sample {
  std::vector<Tensor> frames;
  std::size_t label = 0;
  std::size_t num_classes = 0;

  int time_steps() const { return static_cast<int>(frames.size()); }
  // Desired one-hot output spikes.
  Tensor target() const {
    Tensor t({num_classes});
    t[label] = 1.0;
    return t;
  }
};

}  // namespace stop
