#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "stop/data/sample.h"
#include "stop/learn/rule.h"
#include "stop/lif/lif.h"
#include "stop/topology/network.h"

namespace stop {

struct RandomNetOptions {
  std::size_t min_spiking_layers = 2;
  std::size_t max_spiking_layers = 4;
  std::size_t max_width = 16;  // dense neurons, conv channels
  int min_time_steps = 1;
  int max_time_steps = 6;
  bool allow_conv = true;
};

struct RandomCase {
  NetworkSpec spec;
  NetworkParams params;
  Sample sample;
  SynergyMode mode = SynergyMode::kWTL;
  LossKind loss = LossKind::kCrossEntropy;
};

// A small network with randomized thresholds in [0.5, 1.5], leakages in
// [0.1, 0.9] and a sample whose frames are drawn independently per step.
RandomCase random_case(std::mt19937_64& rng, const RandomNetOptions& options);

struct CheckResult {
  std::string name;
  std::size_t trials = 0;
  double max_rel = 0.0;
  double max_abs = 0.0;
  double tolerance = 0.0;
  std::string worst;  // description of the worst coordinate

  bool passed() const { return max_rel <= tolerance; }
};

struct GradcheckOptions {
  std::uint64_t seed = 1;
  // Coefficient of the direct threshold term in the streaming rule; -1 is
  // correct, anything else is a deliberately injected fault.
  double threshold_bypass = -1.0;
};

// Streaming learn_sample against the naive per-scalar oracle, hard spikes,
// every synergy mode; neuron-grid gradients.
CheckResult check_streaming_vs_naive(std::size_t trials,
                                     const GradcheckOptions& options = {});
// Soft mode, T = 1: streaming gradients for w, theta, alpha against central
// finite differences.
CheckResult check_single_step_finite_diff(std::size_t trials,
                                          const GradcheckOptions& options = {});
// Soft mode, T up to 6: output-layer w and theta against the detached-reset
// unrolled reverse mode.
CheckResult check_output_layer_exact(std::size_t trials,
                                     const GradcheckOptions& options = {});
// Soft mode, nets at most 8 wide, T up to 5: unrolled reverse mode with the
// illusory path against finite differences, all parameter kinds.
CheckResult check_stbp_finite_diff(std::size_t trials,
                                   const GradcheckOptions& options = {});

// All four checks with `trials` cases each; empty when trials is 0.
std::vector<CheckResult> run_gradcheck(std::size_t trials,
                                       const GradcheckOptions& options = {});

std::string format_check(const CheckResult& result);

}  // namespace stop
