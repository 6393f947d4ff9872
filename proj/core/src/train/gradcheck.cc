#include "stop/train/gradcheck.h"

#include <cstdio>
#include <span>

#include "stop/learn/learner.h"
#include "stop/oracle/oracle.h"

namespace stop {

namespace {

std::size_t uniform_int(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

class Tracker {
 public:
  Tracker(std::string name, double tolerance) {
    result_.name = std::move(name);
    result_.tolerance = tolerance;
  }

  void compare(std::span<const double> got, std::span<const double> want,
               std::size_t trial, std::size_t layer, const char* what) {
    const oracle::GradientReport r = oracle::compare_gradients(got, want);
    result_.max_abs = std::max(result_.max_abs, r.max_abs);
    if (r.count > 0 && (r.max_rel > result_.max_rel || result_.worst.empty())) {
      result_.max_rel = r.max_rel;
      result_.worst = "trial " + std::to_string(trial) + " layer " +
                      std::to_string(layer) + " " + what + "[" +
                      std::to_string(r.worst) + "] " +
                      std::to_string(got[r.worst]) + " vs " +
                      std::to_string(want[r.worst]);
    }
  }
  void compare(const Tensor& got, const Tensor& want, std::size_t trial,
               std::size_t layer, const char* what) {
    compare(got.values(), want.values(), trial, layer, what);
  }
  void compare(double got, double want, std::size_t trial, std::size_t layer,
               const char* what) {
    compare(std::span<const double>(&got, 1),
            std::span<const double>(&want, 1), trial, layer, what);
  }
  void count_trial() { ++result_.trials; }
  CheckResult result() const { return result_; }

 private:
  CheckResult result_;
};

NetworkParams streaming_parameter_gradients(const RandomCase& c,
                                            double bypass) {
  StopLearner learner(c.spec, {SpikeMode::kSoft, bypass});
  GradAccumulator acc(c.spec);
  learner.learn(c.params, c.sample, c.mode, c.loss, acc);
  return reduce_to_parameters(c.spec, acc.layers);
}

}  // namespace

RandomCase random_case(std::mt19937_64& rng, const RandomNetOptions& o) {
  RandomCase c;
  const std::size_t spiking =
      uniform_int(rng, o.min_spiking_layers, o.max_spiking_layers);
  const std::size_t classes =
      uniform_int(rng, 2, std::min<std::size_t>(5, o.max_width));
  const std::size_t conv_layers =
      o.allow_conv && spiking > 1 && uniform_int(rng, 0, 1) == 1
          ? uniform_int(rng, 1, spiking - 1)
          : 0;

  Shape input;
  std::string arch;
  if (conv_layers > 0) {
    std::size_t side = 2 * uniform_int(rng, 2, 3);
    input = {uniform_int(rng, 1, 2), side, side};
    for (std::size_t k = 0; k < conv_layers; ++k) {
      const std::size_t channels =
          uniform_int(rng, 1, std::min<std::size_t>(4, o.max_width));
      const std::size_t kernel = uniform_int(rng, 0, 1) == 1 ? 3 : 1;
      arch += std::to_string(channels) + "C" + std::to_string(kernel) + "-";
      if (side % 2 == 0 && side > 2 && uniform_int(rng, 0, 1) == 1) {
        arch += "P2-";
        side /= 2;
      }
    }
  } else {
    input = {uniform_int(rng, 3, 12)};
  }
  for (std::size_t k = conv_layers; k + 1 < spiking; ++k) {
    arch += std::to_string(uniform_int(rng, 2, o.max_width)) + "-";
  }
  arch += std::to_string(classes);
  c.spec = parse_architecture(arch, input, classes);
  c.spec.time_steps = static_cast<int>(uniform_int(
      rng, static_cast<std::size_t>(o.min_time_steps),
      static_cast<std::size_t>(o.max_time_steps)));
  c.spec.surrogate = uniform_int(rng, 0, 1) == 0 ? SurrogateKind::kExpAbs
                                                 : SurrogateKind::kInvQuad;

  c.params = init_params(c.spec, rng());
  std::uniform_real_distribution<double> theta(0.5, 1.5);
  std::uniform_real_distribution<double> alpha(0.1, 0.9);
  for (std::size_t l = 0; l < c.spec.layers.size(); ++l) {
    if (!c.spec.layers[l].is_spiking()) continue;
    for (double& t : c.params[l].thresholds.values()) t = theta(rng);
    c.params[l].leakage = alpha(rng);
  }

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  c.sample.num_classes = classes;
  c.sample.label = uniform_int(rng, 0, classes - 1);
  for (int t = 0; t < c.spec.time_steps; ++t) {
    Tensor frame(input);
    for (double& v : frame.values()) v = unit(rng);
    c.sample.frames.push_back(std::move(frame));
  }
  constexpr SynergyMode kModes[] = {SynergyMode::kW, SynergyMode::kWT,
                                    SynergyMode::kWL, SynergyMode::kWTL};
  c.mode = kModes[uniform_int(rng, 0, 3)];
  c.loss = uniform_int(rng, 0, 1) == 0 ? LossKind::kCrossEntropy
                                       : LossKind::kMeanSquared;
  return c;
}

CheckResult check_streaming_vs_naive(std::size_t trials,
                                     const GradcheckOptions& options) {
  std::mt19937_64 rng(options.seed);
  Tracker tracker("streaming-vs-naive", 1e-9);
  for (std::size_t trial = 0; trial < trials; ++trial) {
    const RandomCase c = random_case(rng, {});
    StopLearner learner(c.spec, {SpikeMode::kHard, options.threshold_bypass});
    GradAccumulator acc(c.spec);
    learner.learn(c.params, c.sample, c.mode, c.loss, acc);
    const NetworkGradients naive = oracle::naive_stop_gradients(
        c.spec, c.params, c.sample, c.mode, c.loss, SpikeMode::kHard);
    for (std::size_t l = 0; l < c.spec.layers.size(); ++l) {
      if (!c.spec.layers[l].is_spiking()) continue;
      tracker.compare(acc.layers[l].weights, naive[l].weights, trial, l,
                      "weights");
      tracker.compare(acc.layers[l].thresholds, naive[l].thresholds, trial, l,
                      "thresholds");
      tracker.compare(acc.layers[l].leakages, naive[l].leakages, trial, l,
                      "leakages");
    }
    tracker.count_trial();
  }
  return tracker.result();
}

CheckResult check_single_step_finite_diff(std::size_t trials,
                                          const GradcheckOptions& options) {
  std::mt19937_64 rng(options.seed + 1);
  Tracker tracker("single-step-vs-finite-diff", 1e-4);
  RandomNetOptions net;
  net.min_time_steps = net.max_time_steps = 1;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    RandomCase c = random_case(rng, net);
    c.mode = SynergyMode::kWTL;
    const NetworkParams got =
        streaming_parameter_gradients(c, options.threshold_bypass);
    const NetworkParams want =
        oracle::finite_diff_gradients(c.spec, c.params, c.sample, c.loss);
    for (std::size_t l = 0; l < c.spec.layers.size(); ++l) {
      if (!c.spec.layers[l].is_spiking()) continue;
      tracker.compare(got[l].weights, want[l].weights, trial, l, "weights");
      tracker.compare(got[l].thresholds, want[l].thresholds, trial, l,
                      "thresholds");
      tracker.compare(got[l].leakage, want[l].leakage, trial, l, "leakage");
    }
    tracker.count_trial();
  }
  return tracker.result();
}

CheckResult check_output_layer_exact(std::size_t trials,
                                     const GradcheckOptions& options) {
  std::mt19937_64 rng(options.seed + 2);
  Tracker tracker("output-layer-vs-detached-reset", 1e-9);
  for (std::size_t trial = 0; trial < trials; ++trial) {
    RandomCase c = random_case(rng, {});
    c.mode = SynergyMode::kWTL;
    const NetworkParams got =
        streaming_parameter_gradients(c, options.threshold_bypass);
    const NetworkParams want = oracle::unrolled_stbp_gradients(
        c.spec, c.params, c.sample, c.loss, false, SpikeMode::kSoft);
    const std::size_t top = c.spec.output_layer();
    tracker.compare(got[top].weights, want[top].weights, trial, top,
                    "weights");
    tracker.compare(got[top].thresholds, want[top].thresholds, trial, top,
                    "thresholds");
    tracker.count_trial();
  }
  return tracker.result();
}

CheckResult check_stbp_finite_diff(std::size_t trials,
                                   const GradcheckOptions& options) {
  std::mt19937_64 rng(options.seed + 3);
  Tracker tracker("unrolled-illusory-vs-finite-diff", 1e-4);
  RandomNetOptions net;
  net.max_width = 8;
  net.max_time_steps = 5;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    const RandomCase c = random_case(rng, net);
    const NetworkParams got = oracle::unrolled_stbp_gradients(
        c.spec, c.params, c.sample, c.loss, true, SpikeMode::kSoft);
    const NetworkParams want =
        oracle::finite_diff_gradients(c.spec, c.params, c.sample, c.loss);
    for (std::size_t l = 0; l < c.spec.layers.size(); ++l) {
      if (!c.spec.layers[l].is_spiking()) continue;
      tracker.compare(got[l].weights, want[l].weights, trial, l, "weights");
      tracker.compare(got[l].thresholds, want[l].thresholds, trial, l,
                      "thresholds");
      tracker.compare(got[l].leakage, want[l].leakage, trial, l, "leakage");
    }
    tracker.count_trial();
  }
  return tracker.result();
}

std::vector<CheckResult> run_gradcheck(std::size_t trials,
                                       const GradcheckOptions& options) {
  if (trials == 0) return {};
  return {check_streaming_vs_naive(trials, options),
          check_single_step_finite_diff(trials, options),
          check_output_layer_exact(trials, options),
          check_stbp_finite_diff(trials, options)};
}

std::string format_check(const CheckResult& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "%-34s trials=%-4zu max_rel=%.3e max_abs=%.3e tol=%.0e %s",
                r.name.c_str(), r.trials, r.max_rel, r.max_abs, r.tolerance,
                r.passed() ? "ok" : "BREACH");
  std::string line = buf;
  if (!r.passed()) line += "  worst: " + r.worst;
  return line;
}

}  // namespace stop
