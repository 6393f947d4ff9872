#include "stop/learn/complexity.h"

#include <string>

#include "stop/error.h"

namespace stop {

LearningRule parse_learning_rule(std::string_view name) {
  if (name == "stbp") return LearningRule::kStbp;
  if (name == "stop-w") return LearningRule::kStopW;
  if (name == "stop-wtl") return LearningRule::kStopWtl;
  throw ParameterError("unknown learning rule '" + std::string(name) + "'");
}

std::string_view to_string(LearningRule rule) {
  switch (rule) {
    case LearningRule::kStbp:
      return "stbp";
    case LearningRule::kStopW:
      return "stop-w";
    case LearningRule::kStopWtl:
      return "stop-wtl";
  }
  return "?";
}

ComplexityEstimate complexity_estimate(std::uint64_t layers,
                                       std::uint64_t width,
                                       std::uint64_t time_steps,
                                       LearningRule rule) {
  if (layers == 0 || width == 0 || time_steps == 0) {
    throw ParameterError("complexity_estimate: L, N and T must be positive");
  }
  const std::uint64_t ln = layers * width;
  const std::uint64_t tln = time_steps * ln;
  switch (rule) {
    case LearningRule::kStbp:
      return {2 * tln, tln * (2 * width + 7)};
    case LearningRule::kStopW:
      return {3 * ln, tln * (2 * width + 2)};
    case LearningRule::kStopWtl:
      return {5 * ln, tln * (2 * width + 6)};
  }
  return {};
}

}  // namespace stop
