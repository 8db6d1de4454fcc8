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

#include "chansparse/equivalence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <json.hpp>

namespace chansparse {

PermutationSet PermutationSet::identity(const std::vector<std::size_t>& sizes) {
  PermutationSet p;
  for (std::size_t n : sizes) {
    std::vector<std::uint32_t> v(n);
    std::iota(v.begin(), v.end(), 0u);
    p.perms.push_back(std::move(v));
  }
  return p;
}

PermutationSet PermutationSet::random(const std::vector<std::size_t>& sizes,
                                      std::mt19937_64& rng) {
  PermutationSet p = identity(sizes);
  for (auto& v : p.perms) std::shuffle(v.begin(), v.end(), rng);
  return p;
}

PermutationSet PermutationSet::inverse() const {
  PermutationSet inv;
  for (const auto& v : perms) {
    std::vector<std::uint32_t> w(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) w[v[k]] = static_cast<std::uint32_t>(k);
    inv.perms.push_back(std::move(w));
  }
  return inv;
}

std::vector<std::size_t> hidden_sizes(const ArchSpec& arch) {
  std::vector<std::size_t> out;
  for (const ConvInterface& c : conv_interfaces(arch)) out.push_back(c.n_out);
  return out;
}

template <typename T>
Network<T> permute_network(const Network<T>& net, const PermutationSet& perms) {
  Network<T> out = net;
  const std::vector<std::size_t> sizes = hidden_sizes(out.arch());
  if (perms.perms.size() != sizes.size()) {
    throw ShapeError("layers", "permutation set covers " +
                                   std::to_string(perms.perms.size()) +
                                   " layers, network has " +
                                   std::to_string(sizes.size()) + " conv layers");
  }
  // Every layer between two convs (and between the last conv and the first FC)
  // must act on channels independently.
  bool seen_fc = false;
  for (std::size_t i = 0; i < out.layer_count(); ++i) {
    const std::string k = out.layer(i).kind();
    if (k == "fc") seen_fc = true;
    if (!seen_fc && k != "conv" && k != "batch_norm" && k != "relu" &&
        k != "maxpool" && k != "flatten") {
      throw ConfigError("permute_network: layer '" + k +
                        "' mixes channels; permutation symmetry does not apply");
    }
  }

  std::vector<std::uint32_t> prev(out.arch().in_channels);
  std::iota(prev.begin(), prev.end(), 0u);
  std::size_t conv_i = 0;
  for (std::size_t i = 0; i < out.layer_count(); ++i) {
    Layer<T>& layer = out.layer(i);
    if (auto* conv = dynamic_cast<ConvLayer<T>*>(&layer)) {
      const auto& pi = perms.perms[conv_i++];
      conv->permute(pi, prev);
      prev = pi;
    } else if (auto* bn = dynamic_cast<BatchNormLayer<T>*>(&layer)) {
      bn->permute(prev);
    }
  }

  const auto fcs = out.fc_layers();
  if (conv_i > 0 && !fcs.empty()) {
    const std::size_t channels = prev.size();
    fcs.front()->permute_input_blocks(prev, fcs.front()->in_features() / channels);
  }
  return out;
}

template <typename T>
EquivalenceReport verify_equivalence(Network<T>& a, Network<T>& b,
                                     std::size_t trials, double tol,
                                     std::uint64_t seed, std::size_t batch_size) {
  const ArchSpec& sa = a.arch();
  const ArchSpec& sb = b.arch();
  if (sa.in_channels != sb.in_channels || sa.in_height != sb.in_height ||
      sa.in_width != sb.in_width) {
    throw ShapeError("input", "networks take different input shapes");
  }
  if (sa.classes != sb.classes) {
    throw ShapeError("classes", "networks emit different class counts");
  }
  EquivalenceReport r;
  r.trials = trials;
  r.tol = tol;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Shape4 shape{batch_size, sa.in_channels, sa.in_height, sa.in_width};
  for (std::size_t t = 0; t < trials; ++t) {
    Tensor4<T> x(shape);
    for (T& v : x.data()) v = static_cast<T>(u(rng));
    const Matrix<T> ya = a.forward(x, Mode::Eval);
    const Matrix<T> yb = b.forward(x, Mode::Eval);
    const double diff =
        static_cast<double>((ya - yb).cwiseAbs().maxCoeff());
    if (!(diff == diff)) {
      r.max_abs_diff = std::numeric_limits<double>::infinity();
    } else {
      r.max_abs_diff = std::max(r.max_abs_diff, diff);
    }
  }
  r.pass = r.max_abs_diff < tol;
  return r;
}

std::string equivalence_report_to_json(const EquivalenceReport& report) {
  return nlohmann::json{{"trials", report.trials},
                        {"tol", report.tol},
                        {"max_abs_diff", report.max_abs_diff},
                        {"pass", report.pass}}
      .dump();
}

BigInt equivalence_class_size(const std::vector<std::size_t>& hidden) {
  BigInt total = 1;
  for (std::size_t n : hidden) {
    for (std::size_t k = 2; k <= n; ++k) total *= k;
  }
  return total;
}

BigInt equivalence_class_size(const ArchSpec& arch) {
  return equivalence_class_size(hidden_sizes(arch));
}

#define CHANSPARSE_INSTANTIATE_EQ(T)                                          \
  template Network<T> permute_network(const Network<T>&,                      \
                                      const PermutationSet&);                 \
  template EquivalenceReport verify_equivalence(Network<T>&, Network<T>&,     \
                                                std::size_t, double,          \
                                                std::uint64_t, std::size_t);

CHANSPARSE_INSTANTIATE_EQ(float)
CHANSPARSE_INSTANTIATE_EQ(double)

#undef CHANSPARSE_INSTANTIATE_EQ

}  // namespace chansparse
