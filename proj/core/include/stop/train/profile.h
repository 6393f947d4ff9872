#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "stop/learn/complexity.h"

namespace stop {

struct ProfileReport {
  std::size_t layers = 0;
  std::size_t width = 0;
  int time_steps = 0;
  ComplexityEstimate stbp;
  ComplexityEstimate stop_w;
  ComplexityEstimate stop_wtl;
  // Measured on a dense L x N network: tensors the streaming learner holds
  // after a sample, and the unrolled tape's step count and tensor count.
  std::size_t stop_retained_tensors = 0;
  std::size_t stop_retained_values = 0;
  std::size_t stbp_tape_steps = 0;
  std::size_t stbp_tape_tensors = 0;
  std::size_t stbp_tape_values = 0;
};

ProfileReport profile(std::size_t layers, std::size_t width, int time_steps,
                      std::uint64_t seed = 1);
std::string format_profile(const ProfileReport& report);

}  // namespace stop
