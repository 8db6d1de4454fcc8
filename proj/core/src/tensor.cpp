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

#include "chansparse/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

namespace chansparse {

template <typename T>
Tensor4<T>::Tensor4(Shape4 shape, std::vector<T> data)
    : shape_(shape), data_(std::move(data)) {
  if (data_.size() != shape_.size()) {
    throw ShapeError("data", "buffer holds " + std::to_string(data_.size()) +
                                 " values, shape needs " +
                                 std::to_string(shape_.size()));
  }
}

template <typename T>
KernelStack<T>::KernelStack(std::size_t out_channels, std::size_t in_slots,
                            std::size_t kh, std::size_t kw, T fill)
    : out_(out_channels), slots_(in_slots), kh_(kh), kw_(kw),
      data_(out_channels * in_slots * kh * kw, fill) {
  if (out_ == 0) throw ShapeError("out_channels", "must be >= 1");
  if (slots_ == 0) throw ShapeError("in_slots", "must be >= 1");
  if (kh_ == 0) throw ShapeError("kernel_height", "must be >= 1");
  if (kw_ == 0) throw ShapeError("kernel_width", "must be >= 1");
}

AxisExtent conv_extent(std::size_t in, std::size_t kernel, std::size_t stride,
                       Padding padding, const char* axis) {
  if (stride == 0) throw ShapeError("stride", "must be >= 1");
  if (kernel == 0) throw ShapeError(axis, "kernel extent must be >= 1");
  if (in == 0) throw ShapeError(axis, "input extent must be >= 1");
  AxisExtent e;
  if (padding == Padding::Valid) {
    if (in < kernel) {
      throw ShapeError(axis, "VALID convolution needs input extent " +
                                 std::to_string(in) + " >= kernel extent " +
                                 std::to_string(kernel));
    }
    e.out = (in - kernel) / stride + 1;
    e.pad_before = 0;
  } else {
    e.out = (in + stride - 1) / stride;
    const std::size_t needed = (e.out - 1) * stride + kernel;
    const std::size_t pad_total = needed > in ? needed - in : 0;
    e.pad_before = pad_total / 2;
  }
  return e;
}

ConvGeometry make_conv_geometry(std::size_t channels, std::size_t in_h,
                                std::size_t in_w, std::size_t kernel_h,
                                std::size_t kernel_w, std::size_t stride,
                                Padding padding) {
  const AxisExtent eh = conv_extent(in_h, kernel_h, stride, padding, "height");
  const AxisExtent ew = conv_extent(in_w, kernel_w, stride, padding, "width");
  ConvGeometry g;
  g.channels = channels;
  g.in_h = in_h;
  g.in_w = in_w;
  g.kernel_h = kernel_h;
  g.kernel_w = kernel_w;
  g.stride = stride;
  g.out_h = eh.out;
  g.out_w = ew.out;
  g.pad_top = eh.pad_before;
  g.pad_left = ew.pad_before;
  return g;
}

template <typename T>
Matrix<T> plane_convolve(const Matrix<T>& plane, const Matrix<T>& kernel,
                         std::size_t stride, Padding padding) {
  const auto h = static_cast<std::size_t>(plane.rows());
  const auto w = static_cast<std::size_t>(plane.cols());
  const auto kh = static_cast<std::size_t>(kernel.rows());
  const auto kw = static_cast<std::size_t>(kernel.cols());
  const AxisExtent eh = conv_extent(h, kh, stride, padding, "height");
  const AxisExtent ew = conv_extent(w, kw, stride, padding, "width");
  Matrix<T> out = Matrix<T>::Zero(static_cast<Eigen::Index>(eh.out),
                                  static_cast<Eigen::Index>(ew.out));
  for (std::size_t oy = 0; oy < eh.out; ++oy) {
    for (std::size_t ox = 0; ox < ew.out; ++ox) {
      T acc{0};
      for (std::size_t ky = 0; ky < kh; ++ky) {
        const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * stride + ky) -
                                  static_cast<std::ptrdiff_t>(eh.pad_before);
        if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
        for (std::size_t kx = 0; kx < kw; ++kx) {
          const std::ptrdiff_t ix =
              static_cast<std::ptrdiff_t>(ox * stride + kx) -
              static_cast<std::ptrdiff_t>(ew.pad_before);
          if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w)) continue;
          acc += plane(iy, ix) * kernel(static_cast<Eigen::Index>(ky),
                                        static_cast<Eigen::Index>(kx));
        }
      }
      out(static_cast<Eigen::Index>(oy), static_cast<Eigen::Index>(ox)) = acc;
    }
  }
  return out;
}

namespace {

// Range of output columns [lo, hi) whose stride-1 input column ox + dx lies
// inside [0, in_w).
std::pair<std::ptrdiff_t, std::ptrdiff_t> valid_span(std::ptrdiff_t dx,
                                                     std::ptrdiff_t in_w,
                                                     std::size_t out_w) {
  const auto n = static_cast<std::ptrdiff_t>(out_w);
  const std::ptrdiff_t lo = std::clamp<std::ptrdiff_t>(-dx, 0, n);
  const std::ptrdiff_t hi = std::clamp<std::ptrdiff_t>(in_w - dx, lo, n);
  return {lo, hi};
}

template <typename T>
Eigen::Map<const Eigen::Array<T, Eigen::Dynamic, 1>> plane_array(
    std::span<const T> p) {
  return {p.data(), static_cast<Eigen::Index>(p.size())};
}

}  // namespace

template <typename T>
void im2col_into(std::span<const T> sample, const ConvGeometry& g, T* dst,
                 std::size_t ld) {
  const std::size_t plane = g.in_h * g.in_w;
  if (sample.size() != g.channels * plane) {
    throw ShapeError("sample", "im2col input holds " +
                                   std::to_string(sample.size()) +
                                   " values, geometry needs " +
                                   std::to_string(g.channels * plane));
  }
  const auto in_h = static_cast<std::ptrdiff_t>(g.in_h);
  const auto in_w = static_cast<std::ptrdiff_t>(g.in_w);
  for (std::size_t c = 0; c < g.channels; ++c) {
    const T* src = sample.data() + c * plane;
    for (std::size_t ky = 0; ky < g.kernel_h; ++ky) {
      for (std::size_t kx = 0; kx < g.kernel_w; ++kx) {
        T* row_base = dst + ((c * g.taps()) + ky * g.kernel_w + kx) * ld;
        const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(kx) -
                                  static_cast<std::ptrdiff_t>(g.pad_left);
        for (std::size_t oy = 0; oy < g.out_h; ++oy) {
          const std::ptrdiff_t iy =
              static_cast<std::ptrdiff_t>(oy * g.stride + ky) -
              static_cast<std::ptrdiff_t>(g.pad_top);
          T* row = row_base + oy * g.out_w;
          if (iy < 0 || iy >= in_h) {
            std::fill(row, row + g.out_w, T{0});
            continue;
          }
          const T* src_row = src + iy * in_w;
          if (g.stride == 1) {
            const auto [lo, hi] = valid_span(dx, in_w, g.out_w);
            std::fill(row, row + lo, T{0});
            std::copy(src_row + lo + dx, src_row + hi + dx, row + lo);
            std::fill(row + hi, row + g.out_w, T{0});
            continue;
          }
          for (std::size_t ox = 0; ox < g.out_w; ++ox) {
            const std::ptrdiff_t ix =
                static_cast<std::ptrdiff_t>(ox * g.stride) + dx;
            row[ox] = (ix < 0 || ix >= in_w) ? T{0} : src_row[ix];
          }
        }
      }
    }
  }
}

template <typename T>
void col2im_from(const T* src, std::size_t ld, const ConvGeometry& g,
                 std::span<T> sample_grad) {
  const std::size_t plane = g.in_h * g.in_w;
  if (sample_grad.size() != g.channels * plane) {
    throw ShapeError("sample", "col2im output size mismatch");
  }
  const auto in_h = static_cast<std::ptrdiff_t>(g.in_h);
  const auto in_w = static_cast<std::ptrdiff_t>(g.in_w);
  for (std::size_t c = 0; c < g.channels; ++c) {
    T* dst = sample_grad.data() + c * plane;
    for (std::size_t ky = 0; ky < g.kernel_h; ++ky) {
      for (std::size_t kx = 0; kx < g.kernel_w; ++kx) {
        const T* row_base = src + ((c * g.taps()) + ky * g.kernel_w + kx) * ld;
        const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(kx) -
                                  static_cast<std::ptrdiff_t>(g.pad_left);
        for (std::size_t oy = 0; oy < g.out_h; ++oy) {
          const std::ptrdiff_t iy =
              static_cast<std::ptrdiff_t>(oy * g.stride + ky) -
              static_cast<std::ptrdiff_t>(g.pad_top);
          if (iy < 0 || iy >= in_h) continue;
          const T* row = row_base + oy * g.out_w;
          T* dst_row = dst + iy * in_w;
          if (g.stride == 1) {
            const auto [lo, hi] = valid_span(dx, in_w, g.out_w);
            for (std::ptrdiff_t ox = lo; ox < hi; ++ox) dst_row[ox + dx] += row[ox];
            continue;
          }
          for (std::size_t ox = 0; ox < g.out_w; ++ox) {
            const std::ptrdiff_t ix =
                static_cast<std::ptrdiff_t>(ox * g.stride) + dx;
            if (ix >= 0 && ix < in_w) dst_row[ix] += row[ox];
          }
        }
      }
    }
  }
}

template <typename T>
void im2col(std::span<const T> sample, const ConvGeometry& g,
            Matrix<T>& cols) {
  const auto rows = static_cast<Eigen::Index>(g.channels * g.taps());
  const auto ncols = static_cast<Eigen::Index>(g.out_plane());
  if (cols.rows() != rows || cols.cols() != ncols) cols.resize(rows, ncols);
  im2col_into(sample, g, cols.data(), g.out_plane());
}

template <typename T>
void col2im(const Matrix<T>& cols, const ConvGeometry& g,
            std::span<T> sample_grad) {
  if (static_cast<std::size_t>(cols.rows()) != g.channels * g.taps() ||
      static_cast<std::size_t>(cols.cols()) != g.out_plane()) {
    throw ShapeError("cols", "col2im matrix does not match geometry");
  }
  col2im_from(cols.data(), g.out_plane(), g, sample_grad);
}

template <typename T>
PoolResult<T> maxpool2x2(const Tensor4<T>& x) {
  const Shape4& s = x.shape();
  if (s.h == 0 || s.w == 0) throw ShapeError("height", "empty plane");
  const Shape4 os{s.n, s.c, (s.h + 1) / 2, (s.w + 1) / 2};
  PoolResult<T> r{Tensor4<T>(os), std::vector<std::uint32_t>(os.size())};
  std::size_t k = 0;
  for (std::size_t n = 0; n < s.n; ++n) {
    for (std::size_t c = 0; c < s.c; ++c) {
      const std::size_t base = (n * s.c + c) * s.plane();
      const T* p = x.data().data() + base;
      for (std::size_t oy = 0; oy < os.h; ++oy) {
        for (std::size_t ox = 0; ox < os.w; ++ox, ++k) {
          T best = -std::numeric_limits<T>::infinity();
          std::size_t best_idx = 0;
          bool found = false;
          for (std::size_t dy = 0; dy < 2; ++dy) {
            const std::size_t iy = 2 * oy + dy;
            if (iy >= s.h) continue;
            for (std::size_t dx = 0; dx < 2; ++dx) {
              const std::size_t ix = 2 * ox + dx;
              if (ix >= s.w) continue;
              const T v = p[iy * s.w + ix];
              if (!found || v > best) {
                best = v;
                best_idx = iy * s.w + ix;
                found = true;
              }
            }
          }
          r.out.data()[k] = best;
          r.argmax[k] = static_cast<std::uint32_t>(base + best_idx);
        }
      }
    }
  }
  return r;
}

template <typename T>
Tensor4<T> maxpool2x2_backward(const Tensor4<T>& grad_out,
                               std::span<const std::uint32_t> argmax,
                               const Shape4& input_shape) {
  if (argmax.size() != grad_out.size()) {
    throw ShapeError("argmax", "index count does not match gradient size");
  }
  Tensor4<T> dx(input_shape);
  auto g = grad_out.data();
  auto d = dx.data();
  for (std::size_t k = 0; k < argmax.size(); ++k) {
    if (argmax[k] >= d.size()) {
      throw ShapeError("argmax", "index outside input tensor");
    }
    d[argmax[k]] += g[k];
  }
  return dx;
}

template <typename T>
Matrix<T> matmul_bias(const Matrix<T>& x, const Matrix<T>& w,
                      std::span<const T> b) {
  if (x.cols() != w.rows()) {
    throw ShapeError("features", "x has " + std::to_string(x.cols()) +
                                     " columns, w has " +
                                     std::to_string(w.rows()) + " rows");
  }
  if (static_cast<std::size_t>(w.cols()) != b.size()) {
    throw ShapeError("outputs", "bias length " + std::to_string(b.size()) +
                                    " != " + std::to_string(w.cols()));
  }
  Matrix<T> y = x * w;
  const Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>> bias(
      b.data(), static_cast<Eigen::Index>(b.size()));
  y.rowwise() += bias;
  return y;
}

template <typename T>
MatmulGrads<T> matmul_bias_backward(const Matrix<T>& x, const Matrix<T>& w,
                                    const Matrix<T>& grad_out) {
  if (grad_out.rows() != x.rows() || grad_out.cols() != w.cols()) {
    throw ShapeError("outputs", "gradient shape does not match forward");
  }
  MatmulGrads<T> g;
  g.dx = grad_out * w.transpose();
  g.dw = x.transpose() * grad_out;
  g.db.assign(static_cast<std::size_t>(w.cols()), T{0});
  for (Eigen::Index i = 0; i < grad_out.rows(); ++i) {
    for (Eigen::Index j = 0; j < grad_out.cols(); ++j) {
      g.db[static_cast<std::size_t>(j)] += grad_out(i, j);
    }
  }
  return g;
}

template <typename T>
void relu_inplace(std::span<T> x) {
  for (T& v : x) v = v > T{0} ? v : T{0};
}

template <typename T>
void relu_backward_inplace(std::span<const T> forward_out, std::span<T> grad) {
  if (forward_out.size() != grad.size()) {
    throw ShapeError("data", "relu gradient size mismatch");
  }
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (!(forward_out[i] > T{0})) grad[i] = T{0};
  }
}

template <typename T>
Tensor4<T> relu(const Tensor4<T>& x) {
  Tensor4<T> y = x;
  relu_inplace(y.data());
  return y;
}

template <typename T>
Matrix<T> relu(const Matrix<T>& x) {
  return x.cwiseMax(T{0});
}

template <typename T>
XentResult<T> softmax_xent(const Matrix<T>& logits,
                           std::span<const std::int32_t> labels) {
  const auto n = static_cast<std::size_t>(logits.rows());
  const auto k = logits.cols();
  if (labels.size() != n) {
    throw ShapeError("batch", "label count " + std::to_string(labels.size()) +
                                  " != logit rows " + std::to_string(n));
  }
  XentResult<T> r;
  r.dlogits.resize(logits.rows(), k);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::int32_t y = labels[i];
    if (y < 0 || y >= k) {
      throw std::out_of_range("label " + std::to_string(y) + " at row " +
                              std::to_string(i) + " outside [0," +
                              std::to_string(k) + ")");
    }
    const auto row = static_cast<Eigen::Index>(i);
    const T m = logits.row(row).maxCoeff();
    T sum{0};
    for (Eigen::Index j = 0; j < k; ++j) {
      const T e = std::exp(logits(row, j) - m);
      r.dlogits(row, j) = e;
      sum += e;
    }
    total += static_cast<double>(std::log(sum) + m - logits(row, y));
    for (Eigen::Index j = 0; j < k; ++j) {
      r.dlogits(row, j) /= sum;
    }
    r.dlogits(row, y) -= T{1};
  }
  if (n > 0) {
    r.loss = static_cast<T>(total / static_cast<double>(n));
    r.dlogits /= static_cast<T>(n);
  }
  return r;
}

template <typename T>
Tensor4<T> batchnorm2d_forward(const Tensor4<T>& x, std::span<const T> gamma,
                               std::span<const T> beta,
                               std::span<T> running_mean,
                               std::span<T> running_var,
                               const BatchNormOptions& options, Mode mode,
                               BatchNormCache<T>* cache) {
  const Shape4& s = x.shape();
  if (!(options.eps > 0.0)) {
    throw ConfigError("batchnorm eps must be > 0");
  }
  if (gamma.size() != s.c || beta.size() != s.c || running_mean.size() != s.c ||
      running_var.size() != s.c) {
    throw ShapeError("channels", "batchnorm parameters sized for " +
                                     std::to_string(gamma.size()) +
                                     " channels, input has " +
                                     std::to_string(s.c));
  }
  const std::size_t count = s.n * s.plane();
  Tensor4<T> y(s);
  if (mode == Mode::Eval) {
    for (std::size_t c = 0; c < s.c; ++c) {
      const T inv = T{1} / std::sqrt(running_var[c] + static_cast<T>(options.eps));
      const T scale = gamma[c] * inv;
      const T shift = beta[c] - running_mean[c] * scale;
      for (std::size_t n = 0; n < s.n; ++n) {
        auto in = x.plane(n, c);
        auto out = y.plane(n, c);
        for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] * scale + shift;
      }
    }
    return y;
  }
  if (count < 2) {
    throw ShapeError("batch", "train-mode batchnorm needs N*H*W >= 2");
  }
  if (cache != nullptr) {
    cache->x_hat = Tensor4<T>(s);
    cache->inv_std.assign(s.c, T{0});
  }
  const T momentum = static_cast<T>(options.momentum);
  for (std::size_t c = 0; c < s.c; ++c) {
    double sum = 0.0;
    for (std::size_t n = 0; n < s.n; ++n) {
      sum += plane_array(x.plane(n, c)).template cast<double>().sum();
    }
    const double mean = sum / static_cast<double>(count);
    double sq = 0.0;
    for (std::size_t n = 0; n < s.n; ++n) {
      sq += (plane_array(x.plane(n, c)).template cast<double>() - mean)
                .square()
                .sum();
    }
    const double var = sq / static_cast<double>(count);
    const T inv = static_cast<T>(1.0 / std::sqrt(var + options.eps));
    const T mean_t = static_cast<T>(mean);
    for (std::size_t n = 0; n < s.n; ++n) {
      auto in = x.plane(n, c);
      auto out = y.plane(n, c);
      for (std::size_t i = 0; i < in.size(); ++i) {
        const T xh = (in[i] - mean_t) * inv;
        if (cache != nullptr) cache->x_hat.plane(n, c)[i] = xh;
        out[i] = gamma[c] * xh + beta[c];
      }
    }
    if (cache != nullptr) cache->inv_std[c] = inv;
    const double unbiased = sq / static_cast<double>(count - 1);
    running_mean[c] = (T{1} - momentum) * running_mean[c] + momentum * mean_t;
    running_var[c] = (T{1} - momentum) * running_var[c] +
                     momentum * static_cast<T>(unbiased);
  }
  return y;
}

template <typename T>
BatchNormGrads<T> batchnorm2d_backward(const Tensor4<T>& grad_out,
                                       std::span<const T> gamma,
                                       const BatchNormCache<T>& cache) {
  const Shape4& s = grad_out.shape();
  if (!(cache.x_hat.shape() == s)) {
    throw ShapeError("data", "batchnorm gradient does not match cached input");
  }
  if (gamma.size() != s.c) {
    throw ShapeError("channels", "gamma length mismatch");
  }
  const std::size_t count = s.n * s.plane();
  BatchNormGrads<T> g{Tensor4<T>(s), std::vector<T>(s.c, T{0}),
                      std::vector<T>(s.c, T{0})};
  for (std::size_t c = 0; c < s.c; ++c) {
    double sum_dy = 0.0;
    double sum_dy_xh = 0.0;
    for (std::size_t n = 0; n < s.n; ++n) {
      auto dy = grad_out.plane(n, c);
      auto xh = cache.x_hat.plane(n, c);
      for (std::size_t i = 0; i < dy.size(); ++i) {
        sum_dy += static_cast<double>(dy[i]);
        sum_dy_xh += static_cast<double>(dy[i]) * static_cast<double>(xh[i]);
      }
    }
    g.dbeta[c] = static_cast<T>(sum_dy);
    g.dgamma[c] = static_cast<T>(sum_dy_xh);
    const T k = gamma[c] * cache.inv_std[c] / static_cast<T>(count);
    const T mean_dy = static_cast<T>(sum_dy);
    const T mean_dy_xh = static_cast<T>(sum_dy_xh);
    const T cnt = static_cast<T>(count);
    for (std::size_t n = 0; n < s.n; ++n) {
      auto dy = grad_out.plane(n, c);
      auto xh = cache.x_hat.plane(n, c);
      auto dx = g.dx.plane(n, c);
      for (std::size_t i = 0; i < dy.size(); ++i) {
        dx[i] = k * (cnt * dy[i] - mean_dy - xh[i] * mean_dy_xh);
      }
    }
  }
  return g;
}

#define CHANSPARSE_INSTANTIATE_TENSOR(T)                                        \
  template class Tensor4<T>;                                                   \
  template class KernelStack<T>;                                               \
  template Matrix<T> plane_convolve(const Matrix<T>&, const Matrix<T>&,        \
                                    std::size_t, Padding);                     \
  template void im2col(std::span<const T>, const ConvGeometry&, Matrix<T>&);   \
  template void im2col_into(std::span<const T>, const ConvGeometry&, T*,       \
                            std::size_t);                                      \
  template void col2im_from(const T*, std::size_t, const ConvGeometry&,        \
                            std::span<T>);                                     \
  template void col2im(const Matrix<T>&, const ConvGeometry&, std::span<T>);   \
  template PoolResult<T> maxpool2x2(const Tensor4<T>&);                        \
  template Tensor4<T> maxpool2x2_backward(const Tensor4<T>&,                   \
                                          std::span<const std::uint32_t>,      \
                                          const Shape4&);                      \
  template Matrix<T> matmul_bias(const Matrix<T>&, const Matrix<T>&,           \
                                 std::span<const T>);                          \
  template MatmulGrads<T> matmul_bias_backward(                                \
      const Matrix<T>&, const Matrix<T>&, const Matrix<T>&);                   \
  template void relu_inplace(std::span<T>);                                    \
  template void relu_backward_inplace(std::span<const T>, std::span<T>);       \
  template Tensor4<T> relu(const Tensor4<T>&);                                 \
  template Matrix<T> relu(const Matrix<T>&);                                   \
  template XentResult<T> softmax_xent(const Matrix<T>&,                        \
                                      std::span<const std::int32_t>);          \
  template Tensor4<T> batchnorm2d_forward(                                     \
      const Tensor4<T>&, std::span<const T>, std::span<const T>, std::span<T>, \
      std::span<T>, const BatchNormOptions&, Mode, BatchNormCache<T>*);        \
  template BatchNormGrads<T> batchnorm2d_backward(                             \
      const Tensor4<T>&, std::span<const T>, const BatchNormCache<T>&);

CHANSPARSE_INSTANTIATE_TENSOR(float)
CHANSPARSE_INSTANTIATE_TENSOR(double)

#undef CHANSPARSE_INSTANTIATE_TENSOR

}  // namespace chansparse
