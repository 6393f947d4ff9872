#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "stop/learn/rule.h"
#include "stop/lif/lif.h"

namespace stop::oracle::detail {

inline double phi(double x, SurrogateKind kind) {
  if (kind == SurrogateKind::kExpAbs) return std::exp(-std::abs(x));
  const double px = std::numbers::pi * x;
  return 1.0 / (1.0 + px * px);
}

inline double spike(double x, SpikeMode mode, SurrogateKind kind) {
  if (mode == SpikeMode::kHard) return x < 0.0 ? 0.0 : 1.0;
  if (kind == SurrogateKind::kExpAbs) {
    return x < 0.0 ? std::exp(x) : 2.0 - std::exp(-x);
  }
  return 0.5 + std::atan(std::numbers::pi * x) / std::numbers::pi;
}

inline double loss_value(std::span<const double> s, std::size_t label,
                         LossKind loss) {
  double e = 0.0;
  if (loss == LossKind::kMeanSquared) {
    for (std::size_t j = 0; j < s.size(); ++j) {
      const double d = s[j] - (j == label ? 1.0 : 0.0);
      e += 0.5 * d * d;
    }
    return e;
  }
  const double m = *std::max_element(s.begin(), s.end());
  double z = 0.0;
  for (double v : s) z += std::exp(v - m);
  return m + std::log(z) - s[label];
}

inline std::vector<double> loss_derivative(std::span<const double> s,
                                           std::size_t label, LossKind loss) {
  std::vector<double> g(s.size());
  if (loss == LossKind::kMeanSquared) {
    for (std::size_t j = 0; j < s.size(); ++j) {
      g[j] = s[j] - (j == label ? 1.0 : 0.0);
    }
    return g;
  }
  const double m = *std::max_element(s.begin(), s.end());
  double z = 0.0;
  for (std::size_t j = 0; j < s.size(); ++j) {
    g[j] = std::exp(s[j] - m);
    z += g[j];
  }
  for (std::size_t j = 0; j < s.size(); ++j) {
    g[j] = g[j] / z - (j == label ? 1.0 : 0.0);
  }
  return g;
}

}  // namespace stop::oracle::detail
