#pragma once

#include <cstdint>
#include <string_view>

namespace stop {

enum class LearningRule { kStbp, kStopW, kStopWtl };

LearningRule parse_learning_rule(std::string_view name);
std::string_view to_string(LearningRule rule);

struct ComplexityEstimate {
  std::uint64_t memory = 0;      // stored scalar units
  std::uint64_t multiplies = 0;  // per sample, forward plus learning
};

// Analytic cost of learning one sample on an L-layer network with N neurons
// per layer over T time-steps.
//   memory:     STBP 2TLN,        STOP-W 3LN,        STOP-WTL 5LN
//   multiplies: STBP TLN(2N + 7), STOP-W TLN(2N + 2), STOP-WTL TLN(2N + 6)
// Throws ParameterError unless L, N and T are positive.
ComplexityEstimate complexity_estimate(std::uint64_t layers,
                                       std::uint64_t width,
                                       std::uint64_t time_steps,
                                       LearningRule rule);

}  // namespace stop
