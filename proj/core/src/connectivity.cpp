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

#include "chansparse/connectivity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace chansparse {

ConnectivityMask::ConnectivityMask(std::size_t n_in, std::size_t n_out,
                                   std::uint64_t seed)
    : n_in_(n_in), n_out_(n_out), seed_(seed), bits_(n_in * n_out, 0) {
  if (n_in == 0) throw ShapeError("n_in", "mask needs >= 1 input channel");
  if (n_out == 0) throw ShapeError("n_out", "mask needs >= 1 output channel");
}

void ConnectivityMask::set(std::size_t out, std::size_t in, bool value) {
  if (out >= n_out_) throw ShapeError("n_out", "row index out of range");
  if (in >= n_in_) throw ShapeError("n_in", "column index out of range");
  bits_[out * n_in_ + in] = value ? 1 : 0;
}

std::size_t ConnectivityMask::active_count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
}

double ConnectivityMask::density() const {
  if (bits_.empty()) return 0.0;
  return static_cast<double>(active_count()) /
         static_cast<double>(bits_.size());
}

std::size_t ConnectivityMask::row_count(std::size_t out) const {
  const auto first = bits_.begin() + static_cast<std::ptrdiff_t>(out * n_in_);
  return static_cast<std::size_t>(
      std::count(first, first + static_cast<std::ptrdiff_t>(n_in_), 1));
}

std::size_t ConnectivityMask::column_count(std::size_t in) const {
  std::size_t n = 0;
  for (std::size_t o = 0; o < n_out_; ++o) n += bits_[o * n_in_ + in];
  return n;
}

std::vector<std::uint32_t> ConnectivityMask::row_indices(std::size_t out) const {
  std::vector<std::uint32_t> idx;
  for (std::size_t i = 0; i < n_in_; ++i) {
    if (bits_[out * n_in_ + i] != 0) idx.push_back(static_cast<std::uint32_t>(i));
  }
  return idx;
}

void validate_alpha(double alpha, const char* what) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw ConfigError(std::string(what) + " must lie in (0, 1], got " +
                      std::to_string(alpha));
  }
}

std::size_t scaled_count(double fraction, std::size_t n) {
  const double x = fraction * static_cast<double>(n);
  const auto c = static_cast<std::size_t>(std::ceil(x - 1e-9));
  return std::clamp<std::size_t>(c, 1, std::max<std::size_t>(n, 1));
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over the combined value.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

ConnectivityMask full_mask(std::size_t n_in, std::size_t n_out) {
  ConnectivityMask m(n_in, n_out);
  for (std::size_t o = 0; o < n_out; ++o) {
    for (std::size_t i = 0; i < n_in; ++i) m.set(o, i);
  }
  return m;
}

namespace {

std::size_t uniform_index(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  std::uniform_int_distribution<std::size_t> dist(lo, hi);
  return dist(rng);
}

void repair_columns(ConnectivityMask& m, std::mt19937_64& rng) {
  for (std::size_t i = 0; i < m.n_in(); ++i) {
    if (m.column_count(i) == 0) {
      m.set(uniform_index(rng, 0, m.n_out() - 1), i);
    }
  }
}

}  // namespace

ConnectivityMask sparse_random_mask(std::size_t n_in, std::size_t n_out,
                                    double alpha, std::uint64_t seed,
                                    Sampler sampler) {
  validate_alpha(alpha);
  ConnectivityMask m(n_in, n_out, seed);
  std::mt19937_64 rng(seed);
  if (sampler == Sampler::FixedFanIn) {
    const std::size_t fan_in = scaled_count(alpha, n_in);
    std::vector<std::size_t> pool(n_in);
    for (std::size_t o = 0; o < n_out; ++o) {
      std::iota(pool.begin(), pool.end(), std::size_t{0});
      for (std::size_t k = 0; k < fan_in; ++k) {
        std::swap(pool[k], pool[uniform_index(rng, k, n_in - 1)]);
        m.set(o, pool[k]);
      }
    }
  } else {
    std::bernoulli_distribution coin(alpha);
    for (std::size_t o = 0; o < n_out; ++o) {
      for (std::size_t i = 0; i < n_in; ++i) {
        if (coin(rng)) m.set(o, i);
      }
      if (m.row_count(o) == 0) m.set(o, uniform_index(rng, 0, n_in - 1));
    }
  }
  repair_columns(m, rng);
  return m;
}

ConnectivityMask densify(const ConnectivityMask& mask, std::size_t additional,
                         std::mt19937_64& rng) {
  ConnectivityMask out = mask;
  if (additional == 0) return out;
  std::vector<std::pair<std::size_t, std::size_t>> inactive;
  for (std::size_t o = 0; o < mask.n_out(); ++o) {
    for (std::size_t i = 0; i < mask.n_in(); ++i) {
      if (!mask.active(o, i)) inactive.emplace_back(o, i);
    }
  }
  const std::size_t take = std::min(additional, inactive.size());
  for (std::size_t k = 0; k < take; ++k) {
    std::swap(inactive[k], inactive[uniform_index(rng, k, inactive.size() - 1)]);
    out.set(inactive[k].first, inactive[k].second);
  }
  return out;
}

std::string to_string(TransformKind kind) {
  switch (kind) {
    case TransformKind::DepthMultiplier: return "depth_multiplier";
    case TransformKind::SparseRandom: return "sparse_random";
    case TransformKind::Hybrid: return "hybrid";
  }
  return "unknown";
}

TransformKind transform_kind_from_string(const std::string& name) {
  if (name == "depth_multiplier" || name == "dense" || name == "depth") {
    return TransformKind::DepthMultiplier;
  }
  if (name == "sparse_random" || name == "sparse") {
    return TransformKind::SparseRandom;
  }
  if (name == "hybrid") return TransformKind::Hybrid;
  throw ConfigError("unknown transform kind '" + name +
                    "' (expected depth_multiplier, sparse_random or hybrid)");
}

ArchSpec depth_multiplier_arch(const ArchSpec& arch, double alpha) {
  validate_alpha(alpha);
  ArchSpec out = arch;
  for (LayerSpec& layer : out.layers) {
    if (auto* conv = std::get_if<ConvSpec>(&layer)) {
      conv->out_channels = scaled_count(alpha, conv->out_channels);
    }
  }
  return out;
}

std::vector<ConnectivityMask> full_masks(const ArchSpec& arch) {
  std::vector<ConnectivityMask> masks;
  for (const ConvInterface& c : conv_interfaces(arch)) {
    masks.push_back(full_mask(c.n_in, c.n_out));
  }
  return masks;
}

double interface_fraction(const ConvInterface& conv, double alpha) {
  return std::min(conv.n_in, conv.n_out) == 1 ? std::sqrt(alpha) : alpha;
}

TransformedArch sparsify_arch(const ArchSpec& arch, double alpha,
                              std::uint64_t seed, Sampler sampler) {
  validate_alpha(alpha);
  TransformedArch t{arch, {}};
  const auto convs = conv_interfaces(arch);
  for (std::size_t l = 0; l < convs.size(); ++l) {
    const double f = interface_fraction(convs[l], alpha);
    t.masks.push_back(sparse_random_mask(convs[l].n_in, convs[l].n_out, f,
                                         mix_seed(seed, l), sampler));
  }
  return t;
}

TransformedArch apply_transform(const ArchSpec& arch,
                                const TransformSpec& spec) {
  switch (spec.kind) {
    case TransformKind::DepthMultiplier: {
      ArchSpec scaled = depth_multiplier_arch(arch, spec.alpha);
      return {scaled, full_masks(scaled)};
    }
    case TransformKind::SparseRandom:
      return sparsify_arch(arch, spec.alpha, spec.seed, spec.sampler);
    case TransformKind::Hybrid:
      validate_alpha(spec.depth, "depth");
      return sparsify_arch(depth_multiplier_arch(arch, spec.depth), spec.alpha,
                           spec.seed, spec.sampler);
  }
  throw ConfigError("unknown transform kind");
}

std::int64_t conv_weight_count(const ArchSpec& arch,
                               const std::vector<ConnectivityMask>& masks) {
  const auto convs = conv_interfaces(arch);
  if (convs.size() != masks.size()) {
    throw ShapeError("masks", "architecture has " +
                                  std::to_string(convs.size()) +
                                  " conv layers but " +
                                  std::to_string(masks.size()) +
                                  " masks were given");
  }
  std::int64_t total = 0;
  for (std::size_t l = 0; l < convs.size(); ++l) {
    total += static_cast<std::int64_t>(convs[l].kernel_h * convs[l].kernel_w *
                                       masks[l].active_count());
  }
  return total;
}

UnreachableBudget::UnreachableBudget(std::int64_t target, std::int64_t minimum)
    : ConfigError("budget of " + std::to_string(target) +
                  " conv weights is below the minimum viable network of " +
                  std::to_string(minimum)),
      minimum_(minimum) {}

namespace {

std::int64_t nominal_weights(const std::vector<ConvInterface>& convs,
                             const ArchSpec& arch, TransformKind kind,
                             double fraction) {
  if (kind == TransformKind::DepthMultiplier) {
    const ArchSpec scaled = depth_multiplier_arch(arch, std::sqrt(fraction));
    std::int64_t total = 0;
    for (const ConvInterface& c : conv_interfaces(scaled)) {
      total += static_cast<std::int64_t>(c.kernel_h * c.kernel_w * c.n_in *
                                         c.n_out);
    }
    return total;
  }
  std::int64_t total = 0;
  for (const ConvInterface& c : convs) {
    const double f = interface_fraction(c, fraction);
    total += static_cast<std::int64_t>(c.kernel_h * c.kernel_w * c.n_out *
                                       scaled_count(f, c.n_in));
  }
  return total;
}

}  // namespace

BudgetMatch match_budget(const ArchSpec& arch, std::int64_t target_weights,
                         TransformKind kind, std::uint64_t seed) {
  if (kind == TransformKind::Hybrid) {
    throw ConfigError("match_budget supports depth_multiplier and sparse_random");
  }
  const auto convs = conv_interfaces(arch);
  const std::int64_t dense = nominal_weights(convs, arch, kind, 1.0);
  if (target_weights > dense) {
    throw ConfigError("budget of " + std::to_string(target_weights) +
                      " conv weights exceeds the dense count " +
                      std::to_string(dense));
  }
  constexpr double kMinFraction = 1e-12;
  const std::int64_t minimum = nominal_weights(convs, arch, kind, kMinFraction);
  if (target_weights < minimum) throw UnreachableBudget(target_weights, minimum);

  double lo = kMinFraction;  // invariant: nominal(lo) <= target
  double hi = 1.0;
  if (nominal_weights(convs, arch, kind, hi) <= target_weights) {
    lo = hi;
  } else {
    // invariant: nominal(hi) > target
    for (int iter = 0; iter < 200 && hi - lo > 1e-15; ++iter) {
      const double mid = 0.5 * (lo + hi);
      if (nominal_weights(convs, arch, kind, mid) <= target_weights) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
  }

  BudgetMatch match;
  match.fraction = lo;
  match.spec.kind = kind;
  match.spec.seed = seed;
  if (kind == TransformKind::DepthMultiplier) {
    match.spec.alpha = std::sqrt(lo);
  } else {
    match.spec.alpha = lo;
  }
  const TransformedArch realized = apply_transform(arch, match.spec);
  match.conv_weights = conv_weight_count(realized.arch, realized.masks);
  return match;
}

AlivenessReport validate_aliveness(const ArchSpec& arch,
                                   const std::vector<ConnectivityMask>& masks) {
  const auto convs = conv_interfaces(arch);
  if (convs.size() != masks.size()) {
    throw ShapeError("masks", "mask count does not match conv layer count");
  }
  AlivenessReport r;
  for (std::size_t l = 0; l < convs.size(); ++l) {
    const ConnectivityMask& m = masks[l];
    if (m.n_in() != convs[l].n_in || m.n_out() != convs[l].n_out) {
      throw ShapeError("channels", "mask " + std::to_string(l) +
                                       " does not match its conv layer");
    }
    for (std::size_t o = 0; o < m.n_out(); ++o) {
      if (m.row_count(o) == 0) r.dead.push_back({l, o, DeadSide::NoIncoming});
    }
    for (std::size_t i = 0; i < m.n_in(); ++i) {
      if (m.column_count(i) == 0) r.dead.push_back({l, i, DeadSide::NoOutgoing});
    }
  }
  r.ok = r.dead.empty();
  return r;
}

}  // namespace chansparse
