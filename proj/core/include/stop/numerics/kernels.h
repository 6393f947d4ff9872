#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "stop/numerics/tensor.h"

namespace stop {

// Geometry of a 2-D cross-correlation over a Cin x H x W feature map.
struct ConvGeometry {
  std::size_t in_channels = 0;
  std::size_t in_height = 0;
  std::size_t in_width = 0;
  std::size_t out_channels = 0;
  std::size_t kernel = 1;
  std::size_t stride = 1;
  std::size_t padding = 0;

  // Throws ShapeError unless both output extents are integral and positive.
  void validate() const;
  std::size_t out_height() const;
  std::size_t out_width() const;
  Shape input_shape() const { return {in_channels, in_height, in_width}; }
  Shape output_shape() const { return {out_channels, out_height(), out_width()}; }
  Shape kernel_shape() const {
    return {out_channels, in_channels, kernel, kernel};
  }
  // Rows of the unfolded (im2col) matrix.
  std::size_t patch_size() const { return in_channels * kernel * kernel; }

  static ConvGeometry of(const Tensor& input, const Tensor& kernels,
                         std::size_t stride, std::size_t padding);
};

// Reusable unfolding buffer. Kernels that take one are still reentrant as long
// as each concurrent caller owns its own scratch.
struct ConvScratch {
  std::vector<double> columns;
};

Tensor matmul(const Tensor& a, const Tensor& b);

// y = W x for W of shape [M x K].
void matvec(const Tensor& weights, std::span<const double> x,
            std::span<double> y);
// y = W^T d.
void matvec_transposed(const Tensor& weights, std::span<const double> d,
                       std::span<double> y);
// acc += d x^T.
void add_outer(Tensor& acc, std::span<const double> d,
               std::span<const double> x);

Tensor conv2d(const Tensor& input, const Tensor& kernels, std::size_t stride,
              std::size_t padding);
void conv2d(const Tensor& input, const Tensor& kernels,
            const ConvGeometry& geometry, Tensor& output, ConvScratch& scratch);

// Exact adjoint of conv2d viewed as a linear map of the input.
Tensor conv2d_adjoint_input(const Tensor& deltas, const Tensor& kernels,
                            const ConvGeometry& geometry);
void conv2d_adjoint_input(const Tensor& deltas, const Tensor& kernels,
                          const ConvGeometry& geometry, Tensor& output,
                          ConvScratch& scratch);

// Gradient of <conv2d(traces, K), deltas> with respect to K.
Tensor conv2d_weight_grad(const Tensor& traces, const Tensor& deltas,
                          const ConvGeometry& geometry);
// grad += conv2d_weight_grad(traces, deltas).
void conv2d_weight_grad_accumulate(const Tensor& traces, const Tensor& deltas,
                                   const ConvGeometry& geometry, Tensor& grad,
                                   ConvScratch& scratch);

// Non-overlapping window x window mean over each channel.
Tensor avgpool2d(const Tensor& input, std::size_t window);
void avgpool2d(const Tensor& input, std::size_t window, Tensor& output);
// Spreads each delta uniformly (scaled by 1/window^2) over its window.
Tensor avgpool2d_adjoint(const Tensor& deltas, std::size_t window);
void avgpool2d_adjoint(const Tensor& deltas, std::size_t window,
                       Tensor& output);

}  // namespace stop
