#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "stop/data/sample.h"
#include "stop/learn/rule.h"
#include "stop/lif/lif.h"
#include "stop/numerics/tensor.h"
#include "stop/topology/network.h"

// Reference gradient computations for verification. Nothing here calls into
// the streaming learner, the LIF step or the tensor kernels: every layer is
// re-expressed as an explicit list of scalar connections and simulated
// element by element. Only the shared data types are reused.
namespace stop::oracle {

// One term of a layer's linear map: out[output] += w[weight] * in[input], or
// coefficient * in[input] for parameter-free layers (weight < 0).
struct Connection {
  std::size_t output = 0;
  std::size_t input = 0;
  std::ptrdiff_t weight = -1;
  double coefficient = 1.0;
};

std::vector<Connection> layer_connections(const LayerSpec& layer);

struct StepRecord {
  Tensor presynaptic;  // layer input at this step
  Tensor input;        // synaptic drive (spiking layers only)
  Tensor potentials;   // U (spiking layers only)
  Tensor spikes;       // s, or the pass-through output
};

struct TapeAudit {
  std::size_t steps = 0;
  std::size_t tensors = 0;
  std::size_t values = 0;
};

// Every layer's state at every time-step of one presentation.
struct UnrolledTape {
  std::vector<std::vector<StepRecord>> steps;  // [t][layer]
  SpikeMode mode = SpikeMode::kHard;

  std::size_t length() const { return steps.size(); }
  TapeAudit audit() const;
};

UnrolledTape record_tape(const NetworkSpec& spec, const NetworkParams& params,
                         const std::vector<Tensor>& frames, SpikeMode mode);

// Recomputes every recorded step from the recorded values of the step before
// and reports whether all of them are reproduced bit for bit.
bool replay_matches(const NetworkSpec& spec, const NetworkParams& params,
                    const UnrolledTape& tape);

// E* = sum over t of E[t] for the output spikes on the tape.
double tape_loss(const NetworkSpec& spec, const UnrolledTape& tape,
                 std::size_t label, LossKind loss);
double total_loss(const NetworkSpec& spec, const NetworkParams& params,
                  const Sample& sample, LossKind loss, SpikeMode mode);

inline constexpr std::size_t kNaiveParameterLimit = 10000;

// Sum over t of delta[t] * trace[t], evaluated per scalar with every error
// and trace rebuilt from its closed-form sum over the tape. Returns
// neuron-grid gradients comparable to GradAccumulator::layers. Throws
// ParameterError for networks above kNaiveParameterLimit parameters.
NetworkGradients naive_stop_gradients(const NetworkSpec& spec,
                                      const NetworkParams& params,
                                      const Sample& sample, SynergyMode mode,
                                      LossKind loss,
                                      SpikeMode spike_mode = SpikeMode::kHard);

inline constexpr std::size_t kTapeValueLimit = 50'000'000;

// Reverse-mode sweep through space and time over the unrolled tape.
// With include_illusory the reset term theta * s[t-1] is differentiated
// through s, giving the exact gradient of E* in Soft mode; without it the
// reset spike is treated as a constant. Gradients are in parameter layout.
struct StbpResult {
  NetworkParams gradients;
  double loss = 0.0;             // E* on the tape
  std::size_t prediction = 0;    // most output spikes, lowest index on ties
  TapeAudit tape;
};

StbpResult unrolled_stbp(const NetworkSpec& spec, const NetworkParams& params,
                         const Sample& sample, LossKind loss,
                         bool include_illusory, SpikeMode mode);
NetworkParams unrolled_stbp_gradients(const NetworkSpec& spec,
                                      const NetworkParams& params,
                                      const Sample& sample, LossKind loss,
                                      bool include_illusory, SpikeMode mode);

enum class ParameterKind { kWeight, kThreshold, kLeakage };

struct ParameterCoordinate {
  std::size_t layer = 0;
  ParameterKind kind = ParameterKind::kWeight;
  std::size_t index = 0;
};

std::vector<ParameterCoordinate> all_coordinates(const NetworkSpec& spec);

double central_difference(const std::function<double(double)>& f, double x,
                          double h);

// (E*(v + h) - E*(v - h)) / 2h on the Soft-mode loss. Throws
// UnsupportedModeError for Hard mode.
double finite_diff_gradient(const NetworkSpec& spec,
                            const NetworkParams& params, const Sample& sample,
                            LossKind loss, const ParameterCoordinate& coord,
                            double h = 1e-5,
                            SpikeMode mode = SpikeMode::kSoft);
NetworkParams finite_diff_gradients(const NetworkSpec& spec,
                                    const NetworkParams& params,
                                    const Sample& sample, LossKind loss,
                                    double h = 1e-5,
                                    SpikeMode mode = SpikeMode::kSoft);

struct GradientReport {
  double max_abs = 0.0;
  double max_rel = 0.0;
  std::size_t worst = 0;  // flat index of the largest relative error
  std::size_t count = 0;

  // Folds in another report whose indices start at `offset`.
  void merge(const GradientReport& other, std::size_t offset = 0);
};

// Relative error |a - b| / max(|a|, |b|, 1e-12). Throws ShapeError on a size
// mismatch.
double relative_error(double a, double b);
GradientReport compare_gradients(std::span<const double> a,
                                 std::span<const double> b);
GradientReport compare_gradients(const Tensor& a, const Tensor& b);

}  // namespace stop::oracle
