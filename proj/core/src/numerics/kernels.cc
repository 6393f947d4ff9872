#include "stop/numerics/kernels.h"

#include <Eigen/Core>

#include "stop/error.h"

namespace stop {
namespace {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;
using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;
using VectorMap = Eigen::Map<Eigen::VectorXd>;

Eigen::Index idx(std::size_t v) { return static_cast<Eigen::Index>(v); }

void require_shape(const Tensor& t, const Shape& expected, const char* what) {
  if (t.shape() != expected) {
    throw ShapeError(std::string(what) + ": expected " +
                     shape_string(expected) + ", got " +
                     shape_string(t.shape()));
  }
}

void ensure_shape(Tensor& t, const Shape& shape) {
  if (t.shape() != shape) t = Tensor(shape);
}

// Unfolds a Cin x H x W map into a (Cin*k*k) x (H'*W') row-major matrix.
void im2col(const double* input, const ConvGeometry& g,
            std::vector<double>& columns) {
  const std::size_t oh = g.out_height();
  const std::size_t ow = g.out_width();
  const std::size_t positions = oh * ow;
  columns.resize(g.patch_size() * positions);
  double* col = columns.data();
  for (std::size_t c = 0; c < g.in_channels; ++c) {
    const double* plane = input + c * g.in_height * g.in_width;
    for (std::size_t ky = 0; ky < g.kernel; ++ky) {
      for (std::size_t kx = 0; kx < g.kernel; ++kx) {
        for (std::size_t oy = 0; oy < oh; ++oy) {
          const long iy = static_cast<long>(oy * g.stride + ky) -
                          static_cast<long>(g.padding);
          if (iy < 0 || iy >= static_cast<long>(g.in_height)) {
            std::fill(col, col + ow, 0.0);
            col += ow;
            continue;
          }
          const double* row = plane + iy * g.in_width;
          for (std::size_t ox = 0; ox < ow; ++ox) {
            const long ix = static_cast<long>(ox * g.stride + kx) -
                            static_cast<long>(g.padding);
            *col++ = (ix < 0 || ix >= static_cast<long>(g.in_width))
                         ? 0.0
                         : row[ix];
          }
        }
      }
    }
  }
}

// Adjoint of im2col: scatters columns back onto a zeroed Cin x H x W map.
void col2im(const std::vector<double>& columns, const ConvGeometry& g,
            double* output) {
  const std::size_t oh = g.out_height();
  const std::size_t ow = g.out_width();
  std::fill(output, output + g.in_channels * g.in_height * g.in_width, 0.0);
  const double* col = columns.data();
  for (std::size_t c = 0; c < g.in_channels; ++c) {
    double* plane = output + c * g.in_height * g.in_width;
    for (std::size_t ky = 0; ky < g.kernel; ++ky) {
      for (std::size_t kx = 0; kx < g.kernel; ++kx) {
        for (std::size_t oy = 0; oy < oh; ++oy) {
          const long iy = static_cast<long>(oy * g.stride + ky) -
                          static_cast<long>(g.padding);
          if (iy < 0 || iy >= static_cast<long>(g.in_height)) {
            col += ow;
            continue;
          }
          double* row = plane + iy * g.in_width;
          for (std::size_t ox = 0; ox < ow; ++ox, ++col) {
            const long ix = static_cast<long>(ox * g.stride + kx) -
                            static_cast<long>(g.padding);
            if (ix >= 0 && ix < static_cast<long>(g.in_width)) row[ix] += *col;
          }
        }
      }
    }
  }
}

void check_pool(const Shape& shape, std::size_t window) {
  if (shape.size() != 3) {
    throw ShapeError("avgpool2d expects a C x H x W tensor, got " +
                     shape_string(shape));
  }
  if (window == 0 || shape[1] % window != 0 || shape[2] % window != 0) {
    throw ShapeError("avgpool2d: " + shape_string(shape) +
                     " not divisible by window " + std::to_string(window));
  }
}

}  // namespace

void ConvGeometry::validate() const {
  if (kernel == 0 || stride == 0) {
    throw ShapeError("conv2d: kernel and stride must be positive");
  }
  for (std::size_t extent : {in_height, in_width}) {
    const std::size_t padded = extent + 2 * padding;
    if (padded < kernel || (padded - kernel) % stride != 0) {
      throw ShapeError("conv2d: non-integral output size for extent " +
                       std::to_string(extent) + ", kernel " +
                       std::to_string(kernel) + ", stride " +
                       std::to_string(stride) + ", padding " +
                       std::to_string(padding));
    }
  }
}

std::size_t ConvGeometry::out_height() const {
  return (in_height + 2 * padding - kernel) / stride + 1;
}

std::size_t ConvGeometry::out_width() const {
  return (in_width + 2 * padding - kernel) / stride + 1;
}

ConvGeometry ConvGeometry::of(const Tensor& input, const Tensor& kernels,
                              std::size_t stride, std::size_t padding) {
  if (input.rank() != 3 || kernels.rank() != 4) {
    throw ShapeError("conv2d expects Cin x H x W input and Cout x Cin x k x k "
                     "kernels, got " +
                     shape_string(input.shape()) + " and " +
                     shape_string(kernels.shape()));
  }
  if (kernels.dim(1) != input.dim(0) || kernels.dim(2) != kernels.dim(3)) {
    throw ShapeError("conv2d: kernels " + shape_string(kernels.shape()) +
                     " incompatible with input " +
                     shape_string(input.shape()));
  }
  ConvGeometry g{input.dim(0), input.dim(1), input.dim(2), kernels.dim(0),
                 kernels.dim(2), stride,       padding};
  g.validate();
  return g;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw ShapeError("matmul: dimension mismatch " + shape_string(a.shape()) +
                     " * " + shape_string(b.shape()));
  }
  Tensor out({a.dim(0), b.dim(1)});
  MatrixMap(out.data(), idx(a.dim(0)), idx(b.dim(1))).noalias() =
      ConstMatrixMap(a.data(), idx(a.dim(0)), idx(a.dim(1))) *
      ConstMatrixMap(b.data(), idx(b.dim(0)), idx(b.dim(1)));
  return out;
}

void matvec(const Tensor& weights, std::span<const double> x,
            std::span<double> y) {
  if (weights.rank() != 2 || weights.dim(1) != x.size() ||
      weights.dim(0) != y.size()) {
    throw ShapeError("matvec: weights " + shape_string(weights.shape()) +
                     " vs x[" + std::to_string(x.size()) + "], y[" +
                     std::to_string(y.size()) + "]");
  }
  VectorMap(y.data(), idx(y.size())).noalias() =
      ConstMatrixMap(weights.data(), idx(weights.dim(0)), idx(weights.dim(1))) *
      ConstVectorMap(x.data(), idx(x.size()));
}

void matvec_transposed(const Tensor& weights, std::span<const double> d,
                       std::span<double> y) {
  if (weights.rank() != 2 || weights.dim(0) != d.size() ||
      weights.dim(1) != y.size()) {
    throw ShapeError("matvec_transposed: weights " +
                     shape_string(weights.shape()) + " vs d[" +
                     std::to_string(d.size()) + "], y[" +
                     std::to_string(y.size()) + "]");
  }
  VectorMap(y.data(), idx(y.size())).noalias() =
      ConstMatrixMap(weights.data(), idx(weights.dim(0)), idx(weights.dim(1)))
          .transpose() *
      ConstVectorMap(d.data(), idx(d.size()));
}

void add_outer(Tensor& acc, std::span<const double> d,
               std::span<const double> x) {
  if (acc.rank() != 2 || acc.dim(0) != d.size() || acc.dim(1) != x.size()) {
    throw ShapeError("add_outer: accumulator " + shape_string(acc.shape()) +
                     " vs d[" + std::to_string(d.size()) + "], x[" +
                     std::to_string(x.size()) + "]");
  }
  MatrixMap(acc.data(), idx(acc.dim(0)), idx(acc.dim(1))).noalias() +=
      ConstVectorMap(d.data(), idx(d.size())) *
      ConstVectorMap(x.data(), idx(x.size())).transpose();
}

Tensor conv2d(const Tensor& input, const Tensor& kernels, std::size_t stride,
              std::size_t padding) {
  const ConvGeometry g = ConvGeometry::of(input, kernels, stride, padding);
  Tensor out;
  ConvScratch scratch;
  conv2d(input, kernels, g, out, scratch);
  return out;
}

void conv2d(const Tensor& input, const Tensor& kernels,
            const ConvGeometry& g, Tensor& output, ConvScratch& scratch) {
  require_shape(input, g.input_shape(), "conv2d input");
  require_shape(kernels, g.kernel_shape(), "conv2d kernels");
  ensure_shape(output, g.output_shape());
  im2col(input.data(), g, scratch.columns);
  const std::size_t positions = g.out_height() * g.out_width();
  MatrixMap(output.data(), idx(g.out_channels), idx(positions)).noalias() =
      ConstMatrixMap(kernels.data(), idx(g.out_channels), idx(g.patch_size())) *
      ConstMatrixMap(scratch.columns.data(), idx(g.patch_size()),
                     idx(positions));
}

Tensor conv2d_adjoint_input(const Tensor& deltas, const Tensor& kernels,
                            const ConvGeometry& geometry) {
  Tensor out;
  ConvScratch scratch;
  conv2d_adjoint_input(deltas, kernels, geometry, out, scratch);
  return out;
}

void conv2d_adjoint_input(const Tensor& deltas, const Tensor& kernels,
                          const ConvGeometry& g, Tensor& output,
                          ConvScratch& scratch) {
  g.validate();
  require_shape(deltas, g.output_shape(), "conv2d_adjoint_input deltas");
  require_shape(kernels, g.kernel_shape(), "conv2d_adjoint_input kernels");
  ensure_shape(output, g.input_shape());
  const std::size_t positions = g.out_height() * g.out_width();
  scratch.columns.resize(g.patch_size() * positions);
  MatrixMap(scratch.columns.data(), idx(g.patch_size()), idx(positions))
      .noalias() =
      ConstMatrixMap(kernels.data(), idx(g.out_channels), idx(g.patch_size()))
          .transpose() *
      ConstMatrixMap(deltas.data(), idx(g.out_channels), idx(positions));
  col2im(scratch.columns, g, output.data());
}

Tensor conv2d_weight_grad(const Tensor& traces, const Tensor& deltas,
                          const ConvGeometry& geometry) {
  Tensor grad(geometry.kernel_shape());
  ConvScratch scratch;
  conv2d_weight_grad_accumulate(traces, deltas, geometry, grad, scratch);
  return grad;
}

void conv2d_weight_grad_accumulate(const Tensor& traces, const Tensor& deltas,
                                   const ConvGeometry& g, Tensor& grad,
                                   ConvScratch& scratch) {
  g.validate();
  require_shape(traces, g.input_shape(), "conv2d_weight_grad traces");
  require_shape(deltas, g.output_shape(), "conv2d_weight_grad deltas");
  require_shape(grad, g.kernel_shape(), "conv2d_weight_grad gradient");
  im2col(traces.data(), g, scratch.columns);
  const std::size_t positions = g.out_height() * g.out_width();
  MatrixMap(grad.data(), idx(g.out_channels), idx(g.patch_size())).noalias() +=
      ConstMatrixMap(deltas.data(), idx(g.out_channels), idx(positions)) *
      ConstMatrixMap(scratch.columns.data(), idx(g.patch_size()),
                     idx(positions))
          .transpose();
}

Tensor avgpool2d(const Tensor& input, std::size_t window) {
  Tensor out;
  avgpool2d(input, window, out);
  return out;
}

void avgpool2d(const Tensor& input, std::size_t window, Tensor& output) {
  check_pool(input.shape(), window);
  const std::size_t channels = input.dim(0);
  const std::size_t oh = input.dim(1) / window;
  const std::size_t ow = input.dim(2) / window;
  ensure_shape(output, {channels, oh, ow});
  const double scale = 1.0 / static_cast<double>(window * window);
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        double sum = 0.0;
        for (std::size_t dy = 0; dy < window; ++dy) {
          for (std::size_t dx = 0; dx < window; ++dx) {
            sum += input.at(c, oy * window + dy, ox * window + dx);
          }
        }
        output.at(c, oy, ox) = sum * scale;
      }
    }
  }
}

Tensor avgpool2d_adjoint(const Tensor& deltas, std::size_t window) {
  Tensor out;
  avgpool2d_adjoint(deltas, window, out);
  return out;
}

void avgpool2d_adjoint(const Tensor& deltas, std::size_t window,
                       Tensor& output) {
  if (deltas.rank() != 3 || window == 0) {
    throw ShapeError("avgpool2d_adjoint expects C x H' x W' deltas, got " +
                     shape_string(deltas.shape()));
  }
  const std::size_t channels = deltas.dim(0);
  const std::size_t oh = deltas.dim(1);
  const std::size_t ow = deltas.dim(2);
  ensure_shape(output, {channels, oh * window, ow * window});
  const double scale = 1.0 / static_cast<double>(window * window);
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t y = 0; y < oh * window; ++y) {
      for (std::size_t x = 0; x < ow * window; ++x) {
        output.at(c, y, x) = deltas.at(c, y / window, x / window) * scale;
      }
    }
  }
}

}  // namespace stop
