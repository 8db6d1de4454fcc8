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

#include <string>

#include "chansparse/checkpoint.hpp"
#include "chansparse/connectivity.hpp"

namespace chansparse::fixtures {

inline std::string config_path(const std::string& name) {
  return std::string(CHANSPARSE_CONFIG_DIR) + "/" + name;
}

inline ArchSpec mnist_arch() { return arch_from_json(read_file(config_path("mnist_arch.json"))); }
inline ArchSpec synth_arch() { return arch_from_json(read_file(config_path("synth_arch.json"))); }

/// Sequential conv net with the given hidden channel counts, 3x3 SAME convs
/// with batch norm, a pool after each conv and a two-layer FC head.
inline ArchSpec small_arch(std::initializer_list<std::size_t> hidden, std::size_t in_c = 1,
                           std::size_t hw = 8, std::size_t classes = 3) {
  ArchSpec a;
  a.in_channels = in_c;
  a.in_height = hw;
  a.in_width = hw;
  a.classes = classes;
  for (std::size_t c : hidden) {
    a.layers.push_back(ConvSpec{c, 3, 3, 1, Padding::Same, true});
    a.layers.push_back(MaxPoolSpec{});
  }
  a.layers.push_back(FlattenSpec{});
  a.layers.push_back(FcSpec{6});
  a.layers.push_back(FcSpec{classes});
  a.layers.push_back(SoftmaxXentSpec{});
  return a;
}

}  // namespace chansparse::fixtures
