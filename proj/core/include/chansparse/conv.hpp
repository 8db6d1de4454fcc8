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

// Dense and channel-sparse convolution kernels.
//
// Dense weights use KernelStack (out, in, kH, kW). Sparse weights are stored
// compactly: slot k of the layer holds kH*kW taps for the input channel
// SlotIndex::channels[k], and the slots of output o are the contiguous range
// [offsets[o], offsets[o + 1]). With a full mask the compact buffer has the
// same layout as the dense KernelStack.

#include <cstdint>
#include <span>
#include <vector>

#include "chansparse/connectivity.hpp"
#include "chansparse/tensor.hpp"

namespace chansparse {

struct SlotIndex {
  std::vector<std::uint32_t> offsets{0};
  std::vector<std::uint32_t> channels;

  static SlotIndex from_mask(const ConnectivityMask& mask);

  std::size_t n_out() const { return offsets.size() - 1; }
  std::size_t slots() const { return channels.size(); }
  std::size_t fan_in(std::size_t o) const { return offsets[o + 1] - offsets[o]; }
};

struct ConvWindow {
  std::size_t kernel_h = 3;
  std::size_t kernel_w = 3;
  std::size_t stride = 1;
  Padding padding = Padding::Same;

  std::size_t taps() const { return kernel_h * kernel_w; }
};

template <typename T>
struct ConvGrads {
  Tensor4<T> dx;
  std::vector<T> dw;  // same layout as the forward weights
  std::vector<T> db;
};

/// output[o] = sum over every input channel i of conv(input[i], W[o, i]) + b[o]
template <typename T>
Tensor4<T> dense_conv_forward(const Tensor4<T>& x, const KernelStack<T>& w,
                              std::span<const T> bias, std::size_t stride,
                              Padding padding);

template <typename T>
ConvGrads<T> dense_conv_backward(const Tensor4<T>& x, const KernelStack<T>& w,
                                 const Tensor4<T>& grad_out,
                                 std::size_t stride, Padding padding);

/// output[o] = sum over slots k of o of conv(input[channels[k]], W[k]) + b[o]
template <typename T>
Tensor4<T> sparse_conv_forward(const Tensor4<T>& x, std::span<const T> weights,
                               const SlotIndex& slots, std::span<const T> bias,
                               const ConvWindow& window);

template <typename T>
ConvGrads<T> sparse_conv_backward(const Tensor4<T>& x,
                                  std::span<const T> weights,
                                  const SlotIndex& slots,
                                  const Tensor4<T>& grad_out,
                                  const ConvWindow& window);

}  // namespace chansparse
