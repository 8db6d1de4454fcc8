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

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "chansparse/tensor.hpp"

namespace chansparse {

/// Labelled images with pixel values in [0, 1].
struct Dataset {
  std::size_t channels = 1;
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t classes = 10;
  std::vector<float> images;  // N * C * H * W
  std::vector<std::int32_t> labels;

  std::size_t size() const { return labels.size(); }
  std::size_t image_size() const { return channels * height * width; }

  template <typename T>
  Tensor4<T> batch(std::span<const std::size_t> indices) const;
  std::vector<std::int32_t> batch_labels(std::span<const std::size_t> indices) const;

  /// Items [first, first + count).
  Dataset slice(std::size_t first, std::size_t count) const;
};

/// Reads an IDX image file (magic 0x00000803) and label file (magic
/// 0x00000801), both big-endian. Throws FormatError naming the byte offset
/// of the first problem and ConfigError when a file cannot be opened.
Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                 std::size_t classes = 10);

/// Standard MNIST file names inside `dir`.
Dataset load_mnist_train(const std::string& dir);
Dataset load_mnist_test(const std::string& dir);

struct SynthSpec {
  std::size_t classes = 4;
  std::size_t channels = 1;
  std::size_t height = 16;
  std::size_t width = 16;
  std::size_t count = 1024;
  double noise = 0.25;
};

/// One Gaussian blob per class, centred on a class-specific point of a
/// circle, plus clipped Gaussian pixel noise. Classes are balanced.
Dataset synth_dataset(const SynthSpec& spec, std::uint64_t seed);

}  // namespace chansparse
