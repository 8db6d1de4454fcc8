// Copyright 2026 The chansparse Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Dense 4-D activation storage and the numerical primitives every layer is
// built from. All kernels are templated on the scalar type; float is used
// for training and double for finite-difference gradient checks.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "chansparse/errors.hpp"

namespace chansparse {

template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Padding { Same, Valid };
enum class Mode { Train, Eval };

struct Shape4 {
  std::size_t n = 0;
  std::size_t c = 0;
  std::size_t h = 0;
  std::size_t w = 0;

  std::size_t size() const { return n * c * h * w; }
  std::size_t plane() const { return h * w; }
  std::size_t sample() const { return c * h * w; }
  friend bool operator==(const Shape4&, const Shape4&) = default;
};

/// (N, C, H, W) row-major tensor; one channel plane is contiguous.
template <typename T>
class Tensor4 {
 public:
  using value_type = T;

  Tensor4() = default;
  explicit Tensor4(Shape4 shape, T fill = T{0})
      : shape_(shape), data_(shape.size(), fill) {}
  Tensor4(Shape4 shape, std::vector<T> data);

  const Shape4& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  std::vector<T>& storage() { return data_; }
  const std::vector<T>& storage() const { return data_; }

  T& operator()(std::size_t n, std::size_t c, std::size_t h, std::size_t w) {
    return data_[((n * shape_.c + c) * shape_.h + h) * shape_.w + w];
  }
  T operator()(std::size_t n, std::size_t c, std::size_t h,
               std::size_t w) const {
    return data_[((n * shape_.c + c) * shape_.h + h) * shape_.w + w];
  }

  std::span<T> sample(std::size_t n) {
    return std::span<T>(data_).subspan(n * shape_.sample(), shape_.sample());
  }
  std::span<const T> sample(std::size_t n) const {
    return std::span<const T>(data_).subspan(n * shape_.sample(),
                                             shape_.sample());
  }
  std::span<T> plane(std::size_t n, std::size_t c) {
    return std::span<T>(data_).subspan((n * shape_.c + c) * shape_.plane(),
                                       shape_.plane());
  }
  std::span<const T> plane(std::size_t n, std::size_t c) const {
    return std::span<const T>(data_).subspan(
        (n * shape_.c + c) * shape_.plane(), shape_.plane());
  }

 private:
  Shape4 shape_{};
  std::vector<T> data_;
};

/// Convolution weights laid out (out_channels, in_slots, kH, kW). For a
/// channel-sparse layer `in_slots` is the per-output fan-in and slot s of
/// output o refers to whichever input channel the layer's slot index names.
template <typename T>
class KernelStack {
 public:
  KernelStack() = default;
  KernelStack(std::size_t out_channels, std::size_t in_slots, std::size_t kh,
              std::size_t kw, T fill = T{0});

  std::size_t out_channels() const { return out_; }
  std::size_t in_slots() const { return slots_; }
  std::size_t kernel_h() const { return kh_; }
  std::size_t kernel_w() const { return kw_; }
  std::size_t taps() const { return kh_ * kw_; }
  std::size_t size() const { return data_.size(); }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  std::vector<T>& storage() { return data_; }

  std::span<T> tap(std::size_t o, std::size_t s) {
    return std::span<T>(data_).subspan((o * slots_ + s) * taps(), taps());
  }
  std::span<const T> tap(std::size_t o, std::size_t s) const {
    return std::span<const T>(data_).subspan((o * slots_ + s) * taps(),
                                             taps());
  }

 private:
  std::size_t out_ = 0, slots_ = 0, kh_ = 0, kw_ = 0;
  std::vector<T> data_;
};

/// Output extent and leading padding along one spatial axis. SAME follows
/// the usual ceil(in / stride) rule with the extra pad row on the far side.
struct AxisExtent {
  std::size_t out = 0;
  std::size_t pad_before = 0;
};

AxisExtent conv_extent(std::size_t in, std::size_t kernel, std::size_t stride,
                       Padding padding, const char* axis);

struct ConvGeometry {
  std::size_t channels = 0;
  std::size_t in_h = 0, in_w = 0;
  std::size_t kernel_h = 0, kernel_w = 0;
  std::size_t stride = 1;
  std::size_t out_h = 0, out_w = 0;
  std::size_t pad_top = 0, pad_left = 0;

  std::size_t taps() const { return kernel_h * kernel_w; }
  std::size_t out_plane() const { return out_h * out_w; }
};

ConvGeometry make_conv_geometry(std::size_t channels, std::size_t in_h,
                                std::size_t in_w, std::size_t kernel_h,
                                std::size_t kernel_w, std::size_t stride,
                                Padding padding);

/// Single-plane cross-correlation (the per-channel spatial convolution).
template <typename T>
Matrix<T> plane_convolve(const Matrix<T>& plane, const Matrix<T>& kernel,
                         std::size_t stride, Padding padding);

/// Unfolds one sample (C, H, W) into a (C*kH*kW) x (outH*outW) matrix; rows
/// for channel c occupy [c*kH*kW, (c+1)*kH*kW).
template <typename T>
void im2col(std::span<const T> sample, const ConvGeometry& g, Matrix<T>& cols);

/// Adjoint of im2col: accumulates `cols` back into `sample_grad`.
template <typename T>
void col2im(const Matrix<T>& cols, const ConvGeometry& g,
            std::span<T> sample_grad);

/// Strided forms: row r of the unfolded sample lives at dst + r * ld. Used to
/// unfold several samples side by side into one matrix.
template <typename T>
void im2col_into(std::span<const T> sample, const ConvGeometry& g, T* dst,
                 std::size_t ld);
template <typename T>
void col2im_from(const T* src, std::size_t ld, const ConvGeometry& g,
                 std::span<T> sample_grad);

template <typename T>
struct PoolResult {
  Tensor4<T> out;
  /// Flat index into the input tensor of the element each output selected.
  std::vector<std::uint32_t> argmax;
};

/// 2x2 / stride 2 max pooling. Odd extents are padded with -inf on the
/// bottom/right; ties resolve to the first element in row-major order.
template <typename T>
PoolResult<T> maxpool2x2(const Tensor4<T>& x);

template <typename T>
Tensor4<T> maxpool2x2_backward(const Tensor4<T>& grad_out,
                               std::span<const std::uint32_t> argmax,
                               const Shape4& input_shape);

template <typename T>
Matrix<T> matmul_bias(const Matrix<T>& x, const Matrix<T>& w,
                      std::span<const T> b);

template <typename T>
struct MatmulGrads {
  Matrix<T> dx;
  Matrix<T> dw;
  std::vector<T> db;
};

template <typename T>
MatmulGrads<T> matmul_bias_backward(const Matrix<T>& x, const Matrix<T>& w,
                                    const Matrix<T>& grad_out);

template <typename T>
void relu_inplace(std::span<T> x);
/// Zeroes `grad` wherever the forward output was not positive.
template <typename T>
void relu_backward_inplace(std::span<const T> forward_out, std::span<T> grad);

template <typename T>
Tensor4<T> relu(const Tensor4<T>& x);
template <typename T>
Matrix<T> relu(const Matrix<T>& x);

template <typename T>
struct XentResult {
  T loss{};
  Matrix<T> dlogits;
};

/// Mean softmax cross-entropy and its gradient (softmax - onehot) / N.
template <typename T>
XentResult<T> softmax_xent(const Matrix<T>& logits,
                           std::span<const std::int32_t> labels);

struct BatchNormOptions {
  double eps = 1e-5;
  double momentum = 0.1;
};

template <typename T>
struct BatchNormCache {
  Tensor4<T> x_hat;
  std::vector<T> inv_std;
};

template <typename T>
struct BatchNormGrads {
  Tensor4<T> dx;
  std::vector<T> dgamma;
  std::vector<T> dbeta;
};

/// Per-channel batch normalization over (N, H, W). Train mode normalizes with
/// batch statistics and folds them into the running estimates
/// (running = (1 - momentum) * running + momentum * batch, unbiased variance);
/// eval mode uses the running estimates. `cache` may be null in eval mode.
template <typename T>
Tensor4<T> batchnorm2d_forward(const Tensor4<T>& x, std::span<const T> gamma,
                               std::span<const T> beta,
                               std::span<T> running_mean,
                               std::span<T> running_var,
                               const BatchNormOptions& options, Mode mode,
                               BatchNormCache<T>* cache);

/// Gradient for a train-mode forward pass.
template <typename T>
BatchNormGrads<T> batchnorm2d_backward(const Tensor4<T>& grad_out,
                                       std::span<const T> gamma,
                                       const BatchNormCache<T>& cache);

}  // namespace chansparse
