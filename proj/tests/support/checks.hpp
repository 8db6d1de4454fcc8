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

// Randomized checks shared by unit tests and the acceptance runner. Each
// takes a seed, builds one random instance and returns a scalar error.

#include <cstdint>
#include <string>

#include "chansparse/connectivity.hpp"

namespace chansparse::checks {

/// Random conv layer geometry small enough for finite differences.
struct ConvCase {
  std::size_t n, c_in, c_out, h, w, kh, kw, stride;
  Padding padding;
};
ConvCase random_conv_case(std::uint64_t seed, std::size_t max_channels = 4,
                          std::size_t max_extent = 7);
std::string describe(const ConvCase& c);

/// Sparse kernel with a full mask vs dense kernel on identical weights:
/// max abs difference over the output and all three gradients.
template <typename T>
double full_mask_vs_dense(std::uint64_t seed);

/// Largest finite-difference relative error over every gradient of one
/// random instance (64-bit, h = 1e-5).
double gradcheck_dense_conv(std::uint64_t seed);
double gradcheck_sparse_conv(std::uint64_t seed);
double gradcheck_batchnorm(std::uint64_t seed);
double gradcheck_maxpool(std::uint64_t seed);
double gradcheck_relu(std::uint64_t seed);
double gradcheck_fc(std::uint64_t seed);
double gradcheck_softmax_xent(std::uint64_t seed);
/// Whole small network, `samples` randomly chosen parameters.
double gradcheck_network(std::uint64_t seed, std::size_t samples = 100);

/// Sparse forward vs the masked-dense direct-summation oracle.
double sparse_vs_masked_oracle(std::uint64_t seed);

}  // namespace chansparse::checks
