#include <algorithm>
#include <cmath>

#include "stop/error.h"
#include "stop/oracle/oracle.h"

namespace stop::oracle {

std::vector<ParameterCoordinate> all_coordinates(const NetworkSpec& spec) {
  std::vector<ParameterCoordinate> coords;
  for (std::size_t l = 0; l < spec.layers.size(); ++l) {
    const LayerSpec& layer = spec.layers[l];
    if (!layer.is_spiking()) continue;
    const std::size_t weights = shape_size(layer.weight_shape());
    for (std::size_t i = 0; i < weights; ++i) {
      coords.push_back({l, ParameterKind::kWeight, i});
    }
    for (std::size_t i = 0; i < layer.threshold_count(); ++i) {
      coords.push_back({l, ParameterKind::kThreshold, i});
    }
    coords.push_back({l, ParameterKind::kLeakage, 0});
  }
  return coords;
}

double central_difference(const std::function<double(double)>& f, double x,
                          double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

namespace {

double& coordinate_ref(NetworkParams& params, const ParameterCoordinate& c) {
  LayerParams& p = params.at(c.layer);
  switch (c.kind) {
    case ParameterKind::kWeight:
      return p.weights.values()[c.index];
    case ParameterKind::kThreshold:
      return p.thresholds.values()[c.index];
    case ParameterKind::kLeakage:
      return p.leakage;
  }
  return p.leakage;
}

}  // namespace

double finite_diff_gradient(const NetworkSpec& spec,
                            const NetworkParams& params, const Sample& sample,
                            LossKind loss, const ParameterCoordinate& coord,
                            double h, SpikeMode mode) {
  if (mode != SpikeMode::kSoft) {
    throw UnsupportedModeError(
        "finite_diff_gradient: the Hard-mode loss is piecewise constant");
  }
  NetworkParams probe = params;
  double& v = coordinate_ref(probe, coord);
  const double origin = v;
  return central_difference(
      [&](double x) {
        v = x;
        const double e = total_loss(spec, probe, sample, loss, mode);
        v = origin;
        return e;
      },
      origin, h);
}

NetworkParams finite_diff_gradients(const NetworkSpec& spec,
                                    const NetworkParams& params,
                                    const Sample& sample, LossKind loss,
                                    double h, SpikeMode mode) {
  NetworkParams grads(spec.layers.size());
  for (std::size_t l = 0; l < spec.layers.size(); ++l) {
    if (!spec.layers[l].is_spiking()) continue;
    grads[l].weights = Tensor::zeros_like(params[l].weights);
    grads[l].thresholds = Tensor::zeros_like(params[l].thresholds);
  }
  for (const ParameterCoordinate& c : all_coordinates(spec)) {
    coordinate_ref(grads, c) =
        finite_diff_gradient(spec, params, sample, loss, c, h, mode);
  }
  return grads;
}

void GradientReport::merge(const GradientReport& other, std::size_t offset) {
  max_abs = std::max(max_abs, other.max_abs);
  if (other.count > 0 && (count == 0 || other.max_rel > max_rel)) {
    max_rel = other.max_rel;
    worst = other.worst + offset;
  }
  count += other.count;
}

double relative_error(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-12});
  return std::abs(a - b) / scale;
}

GradientReport compare_gradients(std::span<const double> a,
                                 std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ShapeError("compare_gradients: " + std::to_string(a.size()) +
                     " vs " + std::to_string(b.size()) + " values");
  }
  GradientReport report;
  report.count = a.size();
  for (std::size_t i = 0; i < a.size(); ++i) {
    report.max_abs = std::max(report.max_abs, std::abs(a[i] - b[i]));
    const double rel = relative_error(a[i], b[i]);
    if (rel > report.max_rel) {
      report.max_rel = rel;
      report.worst = i;
    }
  }
  return report;
}

GradientReport compare_gradients(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError("compare_gradients: shape " + shape_string(a.shape()) +
                     " vs " + shape_string(b.shape()));
  }
  return compare_gradients(a.values(), b.values());
}

}  // namespace stop::oracle
