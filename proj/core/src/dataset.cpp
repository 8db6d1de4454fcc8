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

#include "chansparse/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "chansparse/checkpoint.hpp"
#include "chansparse/errors.hpp"

namespace chansparse {

template <typename T>
Tensor4<T> Dataset::batch(std::span<const std::size_t> indices) const {
  Tensor4<T> out(Shape4{indices.size(), channels, height, width});
  const std::size_t stride = image_size();
  auto dst = out.data();
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (indices[k] >= size()) throw std::out_of_range("dataset index out of range");
    const float* src = images.data() + indices[k] * stride;
    for (std::size_t i = 0; i < stride; ++i) dst[k * stride + i] = static_cast<T>(src[i]);
  }
  return out;
}

template Tensor4<float> Dataset::batch(std::span<const std::size_t>) const;
template Tensor4<double> Dataset::batch(std::span<const std::size_t>) const;

std::vector<std::int32_t> Dataset::batch_labels(
    std::span<const std::size_t> indices) const {
  std::vector<std::int32_t> out(indices.size());
  for (std::size_t k = 0; k < indices.size(); ++k) out[k] = labels.at(indices[k]);
  return out;
}

Dataset Dataset::slice(std::size_t first, std::size_t count) const {
  if (first > size()) first = size();
  count = std::min(count, size() - first);
  Dataset d = *this;
  d.images.assign(images.begin() + static_cast<std::ptrdiff_t>(first * image_size()),
                  images.begin() +
                      static_cast<std::ptrdiff_t>((first + count) * image_size()));
  d.labels.assign(labels.begin() + static_cast<std::ptrdiff_t>(first),
                  labels.begin() + static_cast<std::ptrdiff_t>(first + count));
  return d;
}

namespace {

std::uint32_t read_be32(const std::string& bytes, std::size_t at,
                        const std::string& file) {
  if (bytes.size() < at + 4) {
    throw FormatError(file + ": truncated header", bytes.size());
  }
  std::uint32_t v = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    v = (v << 8) | static_cast<unsigned char>(bytes[at + i]);
  }
  return v;
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                 std::size_t classes) {
  if (!std::filesystem::exists(images_path)) {
    throw ConfigError("image file not found: " + images_path);
  }
  if (!std::filesystem::exists(labels_path)) {
    throw ConfigError("label file not found: " + labels_path);
  }
  const std::string img = read_file(images_path);
  const std::string lab = read_file(labels_path);

  if (read_be32(img, 0, images_path) != 0x00000803) {
    throw FormatError(images_path + ": bad magic (expected 0x00000803)", 0);
  }
  if (read_be32(lab, 0, labels_path) != 0x00000801) {
    throw FormatError(labels_path + ": bad magic (expected 0x00000801)", 0);
  }
  const std::size_t n = read_be32(img, 4, images_path);
  const std::size_t rows = read_be32(img, 8, images_path);
  const std::size_t cols = read_be32(img, 12, images_path);
  const std::size_t n_labels = read_be32(lab, 4, labels_path);
  if (n != n_labels) {
    throw FormatError(labels_path + ": holds " + std::to_string(n_labels) +
                          " labels but the image file holds " + std::to_string(n),
                      4);
  }
  const std::size_t img_bytes = 16 + n * rows * cols;
  if (img.size() < img_bytes) {
    throw FormatError(images_path + ": truncated pixel data", img.size());
  }
  if (lab.size() < 8 + n) {
    throw FormatError(labels_path + ": truncated label data", lab.size());
  }

  Dataset d;
  d.channels = 1;
  d.height = rows;
  d.width = cols;
  d.classes = classes;
  d.images.resize(n * rows * cols);
  for (std::size_t i = 0; i < d.images.size(); ++i) {
    d.images[i] = static_cast<float>(static_cast<unsigned char>(img[16 + i])) / 255.0f;
  }
  d.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<unsigned char>(lab[8 + i]);
    if (static_cast<std::size_t>(label) >= classes) {
      throw FormatError(labels_path + ": label " + std::to_string(label) +
                            " outside [0," + std::to_string(classes) + ")",
                        8 + i);
    }
    d.labels[i] = label;
  }
  return d;
}

Dataset load_mnist_train(const std::string& dir) {
  const std::filesystem::path p(dir);
  return load_idx((p / "train-images-idx3-ubyte").string(),
                  (p / "train-labels-idx1-ubyte").string());
}

Dataset load_mnist_test(const std::string& dir) {
  const std::filesystem::path p(dir);
  return load_idx((p / "t10k-images-idx3-ubyte").string(),
                  (p / "t10k-labels-idx1-ubyte").string());
}

Dataset synth_dataset(const SynthSpec& spec, std::uint64_t seed) {
  if (spec.classes < 2 || spec.channels == 0 || spec.height == 0 ||
      spec.width == 0) {
    throw ConfigError("synth dataset needs >= 2 classes and non-empty images");
  }
  Dataset d;
  d.channels = spec.channels;
  d.height = spec.height;
  d.width = spec.width;
  d.classes = spec.classes;
  d.images.resize(spec.count * d.image_size());
  d.labels.resize(spec.count);

  // Class prototypes: one blob per class on a circle around the centre.
  const double cy = (static_cast<double>(spec.height) - 1.0) / 2.0;
  const double cx = (static_cast<double>(spec.width) - 1.0) / 2.0;
  const double radius = 0.3 * static_cast<double>(std::min(spec.height, spec.width));
  const double sigma = std::max(1.0, 0.12 * static_cast<double>(std::min(spec.height, spec.width)));
  std::vector<std::vector<double>> proto(spec.classes,
                                         std::vector<double>(d.image_size()));
  for (std::size_t k = 0; k < spec.classes; ++k) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) /
                         static_cast<double>(spec.classes);
    const double by = cy + radius * std::sin(angle);
    const double bx = cx + radius * std::cos(angle);
    for (std::size_t c = 0; c < spec.channels; ++c) {
      for (std::size_t y = 0; y < spec.height; ++y) {
        for (std::size_t x = 0; x < spec.width; ++x) {
          const double dy = static_cast<double>(y) - by;
          const double dx = static_cast<double>(x) - bx;
          proto[k][(c * spec.height + y) * spec.width + x] =
              std::exp(-(dy * dy + dx * dx) / (2.0 * sigma * sigma));
        }
      }
    }
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, spec.noise);
  for (std::size_t i = 0; i < spec.count; ++i) {
    const std::size_t k = i % spec.classes;
    d.labels[i] = static_cast<std::int32_t>(k);
    float* dst = d.images.data() + i * d.image_size();
    for (std::size_t p = 0; p < d.image_size(); ++p) {
      dst[p] = static_cast<float>(std::clamp(proto[k][p] + noise(rng), 0.0, 1.0));
    }
  }
  return d;
}

}  // namespace chansparse
