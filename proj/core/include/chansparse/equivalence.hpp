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

// Channel-permutation symmetry of sequential conv nets. Permuting the output
// channels of conv layer i by pi_i, its input channels by pi_{i-1}, its
// per-channel bias/batch-norm state by pi_i, and the flattened feature blocks
// of the first FC layer by the last pi yields a network computing exactly the
// same function, since every nonlinearity between convs acts per channel.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "chansparse/network.hpp"

namespace chansparse {

/// One permutation per conv layer (the image-channel permutation is the
/// identity). perms[i][k] is the old channel placed at new position k.
struct PermutationSet {
  std::vector<std::vector<std::uint32_t>> perms;

  static PermutationSet identity(const std::vector<std::size_t>& sizes);
  static PermutationSet random(const std::vector<std::size_t>& sizes,
                               std::mt19937_64& rng);
  PermutationSet inverse() const;
};

/// Output channel count of every conv layer.
std::vector<std::size_t> hidden_sizes(const ArchSpec& arch);

template <typename T>
Network<T> permute_network(const Network<T>& net, const PermutationSet& perms);

struct EquivalenceReport {
  std::size_t trials = 0;
  double tol = 0.0;
  double max_abs_diff = 0.0;
  bool pass = false;
};

/// Feeds `trials` random uniform [0,1) batches through both networks in
/// eval mode and compares logits elementwise.
template <typename T>
EquivalenceReport verify_equivalence(Network<T>& a, Network<T>& b,
                                     std::size_t trials, double tol,
                                     std::uint64_t seed = 0,
                                     std::size_t batch_size = 8);

std::string equivalence_report_to_json(const EquivalenceReport& report);

using BigInt = boost::multiprecision::cpp_int;

/// Product over conv layers of (channels)!.
BigInt equivalence_class_size(const ArchSpec& arch);
BigInt equivalence_class_size(const std::vector<std::size_t>& hidden);

}  // namespace chansparse
