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

#include "chansparse/conv.hpp"

#include <algorithm>
#include <string>

namespace chansparse {

SlotIndex SlotIndex::from_mask(const ConnectivityMask& mask) {
  SlotIndex s;
  s.offsets.reserve(mask.n_out() + 1);
  for (std::size_t o = 0; o < mask.n_out(); ++o) {
    for (std::uint32_t i : mask.row_indices(o)) s.channels.push_back(i);
    s.offsets.push_back(static_cast<std::uint32_t>(s.channels.size()));
  }
  return s;
}

namespace {

template <typename T>
using RowVector = Eigen::Matrix<T, 1, Eigen::Dynamic>;

template <typename T>
Eigen::Map<const Matrix<T>> as_matrix(std::span<const T> data, std::size_t rows,
                                      std::size_t cols) {
  return {data.data(), static_cast<Eigen::Index>(rows),
          static_cast<Eigen::Index>(cols)};
}

template <typename T>
Eigen::Map<Matrix<T>> as_matrix(std::span<T> data, std::size_t rows,
                                std::size_t cols) {
  return {data.data(), static_cast<Eigen::Index>(rows),
          static_cast<Eigen::Index>(cols)};
}

void check_bias(std::size_t bias, std::size_t out) {
  if (bias != out) {
    throw ShapeError("out_channels", "bias has " + std::to_string(bias) +
                                         " entries for " + std::to_string(out) +
                                         " output channels");
  }
}

void check_slots(const SlotIndex& slots, std::size_t n_in,
                 std::size_t weight_count, std::size_t taps) {
  if (slots.offsets.empty() || slots.offsets.back() != slots.channels.size()) {
    throw ShapeError("slots", "slot offsets do not cover the channel list");
  }
  for (std::uint32_t c : slots.channels) {
    if (c >= n_in) {
      throw ShapeError("channels", "slot references input channel " +
                                       std::to_string(c) + " of " +
                                       std::to_string(n_in));
    }
  }
  if (weight_count != slots.slots() * taps) {
    throw ShapeError("weights", "compact weights hold " +
                                    std::to_string(weight_count) +
                                    " values, slots need " +
                                    std::to_string(slots.slots() * taps));
  }
}

// Samples are unfolded side by side so each GEMM spans several samples.
constexpr std::size_t kChunkColumns = 512;

std::size_t chunk_samples(const ConvGeometry& g) {
  return std::max<std::size_t>(1, kChunkColumns / std::max<std::size_t>(
                                                      g.out_plane(), 1));
}

template <typename T>
void unfold(const Tensor4<T>& x, const ConvGeometry& g, std::size_t n0,
            std::size_t count, Matrix<T>& cols) {
  const std::size_t plane = g.out_plane();
  const std::size_t ld = count * plane;
  cols.resize(static_cast<Eigen::Index>(g.channels * g.taps()),
              static_cast<Eigen::Index>(ld));
  for (std::size_t k = 0; k < count; ++k) {
    im2col_into(x.sample(n0 + k), g, cols.data() + k * plane, ld);
  }
}

template <typename T>
void fold(const Matrix<T>& dcols, const ConvGeometry& g, std::size_t n0,
          std::size_t count, Tensor4<T>& dx) {
  const std::size_t plane = g.out_plane();
  for (std::size_t k = 0; k < count; ++k) {
    col2im_from(dcols.data() + k * plane, count * plane, g, dx.sample(n0 + k));
  }
}

// Copies a (c_out x count*plane) result into NCHW samples, adding the bias.
template <typename T>
void scatter_output(const Matrix<T>& out, std::span<const T> bias,
                    std::size_t n0, std::size_t count, Tensor4<T>& y) {
  const auto c_out = static_cast<std::size_t>(out.rows());
  const std::size_t plane = y.shape().h * y.shape().w;
  for (std::size_t k = 0; k < count; ++k) {
    T* dst = y.sample(n0 + k).data();
    for (std::size_t o = 0; o < c_out; ++o) {
      const T* src = out.data() + o * static_cast<std::size_t>(out.cols()) +
                     k * plane;
      for (std::size_t p = 0; p < plane; ++p) dst[o * plane + p] = src[p] + bias[o];
    }
  }
}

template <typename T>
void gather_grad(const Tensor4<T>& grad_out, std::size_t n0, std::size_t count,
                 Matrix<T>& dy) {
  const std::size_t c_out = grad_out.shape().c;
  const std::size_t plane = grad_out.shape().h * grad_out.shape().w;
  dy.resize(static_cast<Eigen::Index>(c_out),
            static_cast<Eigen::Index>(count * plane));
  for (std::size_t k = 0; k < count; ++k) {
    const T* src = grad_out.sample(n0 + k).data();
    for (std::size_t o = 0; o < c_out; ++o) {
      std::copy_n(src + o * plane, plane, dy.data() + o * count * plane + k * plane);
    }
  }
}

// Transpose of SlotIndex: for input channel i, the (output, slot) pairs that
// read it, in ascending output order.
struct FanOut {
  std::vector<std::uint32_t> offsets;
  std::vector<std::uint32_t> outputs;
  std::vector<std::uint32_t> slots;
};

FanOut fan_out(const SlotIndex& s, std::size_t n_in) {
  FanOut f;
  f.offsets.assign(n_in + 1, 0);
  for (std::uint32_t c : s.channels) ++f.offsets[c + 1];
  for (std::size_t i = 0; i < n_in; ++i) f.offsets[i + 1] += f.offsets[i];
  f.outputs.resize(s.slots());
  f.slots.resize(s.slots());
  std::vector<std::uint32_t> next(f.offsets.begin(), f.offsets.end() - 1);
  for (std::size_t o = 0; o < s.n_out(); ++o) {
    for (std::uint32_t k = s.offsets[o]; k < s.offsets[o + 1]; ++k) {
      const std::uint32_t at = next[s.channels[k]]++;
      f.outputs[at] = static_cast<std::uint32_t>(o);
      f.slots[at] = k;
    }
  }
  return f;
}

// Stacks the tap blocks of channel i's readers into an (m x taps) matrix.
template <typename T>
void gather_taps(std::span<const T> weights, const FanOut& f, std::size_t i,
                 std::size_t taps, Matrix<T>& wi) {
  const std::uint32_t begin = f.offsets[i];
  const std::uint32_t m = f.offsets[i + 1] - begin;
  wi.resize(m, static_cast<Eigen::Index>(taps));
  for (std::uint32_t r = 0; r < m; ++r) {
    std::copy_n(weights.data() + f.slots[begin + r] * taps, taps,
                wi.data() + r * taps);
  }
}

}  // namespace

template <typename T>
Tensor4<T> dense_conv_forward(const Tensor4<T>& x, const KernelStack<T>& w,
                              std::span<const T> bias, std::size_t stride,
                              Padding padding) {
  const Shape4& s = x.shape();
  if (s.c != w.in_slots()) {
    throw ShapeError("channels", "input has " + std::to_string(s.c) +
                                     " channels, kernel expects " +
                                     std::to_string(w.in_slots()));
  }
  check_bias(bias.size(), w.out_channels());
  const ConvGeometry g = make_conv_geometry(s.c, s.h, s.w, w.kernel_h(),
                                            w.kernel_w(), stride, padding);
  const std::size_t c_out = w.out_channels();
  Tensor4<T> y(Shape4{s.n, c_out, g.out_h, g.out_w});
  const auto wm = as_matrix(w.data(), c_out, s.c * g.taps());
  const std::size_t chunk = chunk_samples(g);
  Matrix<T> cols, out;
  for (std::size_t n0 = 0; n0 < s.n; n0 += chunk) {
    const std::size_t count = std::min(chunk, s.n - n0);
    unfold(x, g, n0, count, cols);
    out.noalias() = wm * cols;
    scatter_output(out, bias, n0, count, y);
  }
  return y;
}

template <typename T>
ConvGrads<T> dense_conv_backward(const Tensor4<T>& x, const KernelStack<T>& w,
                                 const Tensor4<T>& grad_out,
                                 std::size_t stride, Padding padding) {
  const Shape4& s = x.shape();
  if (s.c != w.in_slots()) {
    throw ShapeError("channels", "input channel count does not match kernel");
  }
  const ConvGeometry g = make_conv_geometry(s.c, s.h, s.w, w.kernel_h(),
                                            w.kernel_w(), stride, padding);
  const std::size_t c_out = w.out_channels();
  if (!(grad_out.shape() == Shape4{s.n, c_out, g.out_h, g.out_w})) {
    throw ShapeError("grad_out", "gradient shape does not match conv output");
  }
  ConvGrads<T> r{Tensor4<T>(s), std::vector<T>(w.size(), T{0}),
                 std::vector<T>(c_out, T{0})};
  const auto wm = as_matrix(w.data(), c_out, s.c * g.taps());
  auto dw = as_matrix(std::span<T>(r.dw), c_out, s.c * g.taps());
  const std::size_t chunk = chunk_samples(g);
  Matrix<T> cols, dy, dcols;
  for (std::size_t n0 = 0; n0 < s.n; n0 += chunk) {
    const std::size_t count = std::min(chunk, s.n - n0);
    unfold(x, g, n0, count, cols);
    gather_grad(grad_out, n0, count, dy);
    dw.noalias() += dy * cols.transpose();
    dcols.noalias() = wm.transpose() * dy;
    fold(dcols, g, n0, count, r.dx);
    for (std::size_t o = 0; o < c_out; ++o) {
      r.db[o] += dy.row(static_cast<Eigen::Index>(o)).sum();
    }
  }
  return r;
}

template <typename T>
Tensor4<T> sparse_conv_forward(const Tensor4<T>& x, std::span<const T> weights,
                               const SlotIndex& slots, std::span<const T> bias,
                               const ConvWindow& window) {
  const Shape4& s = x.shape();
  check_slots(slots, s.c, weights.size(), window.taps());
  check_bias(bias.size(), slots.n_out());
  const ConvGeometry g =
      make_conv_geometry(s.c, s.h, s.w, window.kernel_h, window.kernel_w,
                         window.stride, window.padding);
  const std::size_t c_out = slots.n_out();
  const std::size_t taps = g.taps();
  const FanOut f = fan_out(slots, s.c);
  Tensor4<T> y(Shape4{s.n, c_out, g.out_h, g.out_w});
  const std::size_t chunk = chunk_samples(g);
  Matrix<T> cols, out, wi, ti;
  for (std::size_t n0 = 0; n0 < s.n; n0 += chunk) {
    const std::size_t count = std::min(chunk, s.n - n0);
    unfold(x, g, n0, count, cols);
    out.setZero(static_cast<Eigen::Index>(c_out), cols.cols());
    for (std::size_t i = 0; i < s.c; ++i) {
      if (f.offsets[i] == f.offsets[i + 1]) continue;
      gather_taps(weights, f, i, taps, wi);
      ti.noalias() = wi * cols.middleRows(static_cast<Eigen::Index>(i * taps),
                                          static_cast<Eigen::Index>(taps));
      for (std::uint32_t r = 0; r < f.offsets[i + 1] - f.offsets[i]; ++r) {
        out.row(f.outputs[f.offsets[i] + r]) += ti.row(r);
      }
    }
    scatter_output(out, bias, n0, count, y);
  }
  return y;
}

template <typename T>
ConvGrads<T> sparse_conv_backward(const Tensor4<T>& x,
                                  std::span<const T> weights,
                                  const SlotIndex& slots,
                                  const Tensor4<T>& grad_out,
                                  const ConvWindow& window) {
  const Shape4& s = x.shape();
  check_slots(slots, s.c, weights.size(), window.taps());
  const ConvGeometry g =
      make_conv_geometry(s.c, s.h, s.w, window.kernel_h, window.kernel_w,
                         window.stride, window.padding);
  const std::size_t c_out = slots.n_out();
  if (!(grad_out.shape() == Shape4{s.n, c_out, g.out_h, g.out_w})) {
    throw ShapeError("grad_out", "gradient shape does not match conv output");
  }
  const std::size_t taps = g.taps();
  const auto etaps = static_cast<Eigen::Index>(taps);
  const FanOut f = fan_out(slots, s.c);
  ConvGrads<T> r{Tensor4<T>(s), std::vector<T>(weights.size(), T{0}),
                 std::vector<T>(c_out, T{0})};
  const std::size_t chunk = chunk_samples(g);
  Matrix<T> cols, dy, dcols, wi, dyi, dwi;
  for (std::size_t n0 = 0; n0 < s.n; n0 += chunk) {
    const std::size_t count = std::min(chunk, s.n - n0);
    unfold(x, g, n0, count, cols);
    gather_grad(grad_out, n0, count, dy);
    for (std::size_t o = 0; o < c_out; ++o) {
      r.db[o] += dy.row(static_cast<Eigen::Index>(o)).sum();
    }
    dcols.resize(cols.rows(), cols.cols());
    for (std::size_t i = 0; i < s.c; ++i) {
      const std::uint32_t begin = f.offsets[i];
      const std::uint32_t m = f.offsets[i + 1] - begin;
      if (m == 0) {
        dcols.middleRows(static_cast<Eigen::Index>(i * taps), etaps).setZero();
        continue;
      }
      dyi.resize(m, dy.cols());
      for (std::uint32_t k = 0; k < m; ++k) dyi.row(k) = dy.row(f.outputs[begin + k]);
      gather_taps(weights, f, i, taps, wi);
      dwi.noalias() =
          dyi * cols.middleRows(static_cast<Eigen::Index>(i * taps), etaps).transpose();
      for (std::uint32_t k = 0; k < m; ++k) {
        T* dst = r.dw.data() + f.slots[begin + k] * taps;
        for (std::size_t t = 0; t < taps; ++t) dst[t] += dwi(k, static_cast<Eigen::Index>(t));
      }
      dcols.middleRows(static_cast<Eigen::Index>(i * taps), etaps).noalias() =
          wi.transpose() * dyi;
    }
    fold(dcols, g, n0, count, r.dx);
  }
  return r;
}

#define CHANSPARSE_INSTANTIATE_CONV(T)                                         \
  template Tensor4<T> dense_conv_forward(const Tensor4<T>&,                   \
                                         const KernelStack<T>&,               \
                                         std::span<const T>, std::size_t,     \
                                         Padding);                            \
  template ConvGrads<T> dense_conv_backward(const Tensor4<T>&,                \
                                            const KernelStack<T>&,            \
                                            const Tensor4<T>&, std::size_t,   \
                                            Padding);                         \
  template Tensor4<T> sparse_conv_forward(const Tensor4<T>&,                  \
                                          std::span<const T>,                 \
                                          const SlotIndex&,                   \
                                          std::span<const T>,                 \
                                          const ConvWindow&);                 \
  template ConvGrads<T> sparse_conv_backward(                                 \
      const Tensor4<T>&, std::span<const T>, const SlotIndex&,                \
      const Tensor4<T>&, const ConvWindow&);

CHANSPARSE_INSTANTIATE_CONV(float)
CHANSPARSE_INSTANTIATE_CONV(double)

#undef CHANSPARSE_INSTANTIATE_CONV

}  // namespace chansparse
