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

// Channel-to-channel connection structures: generation, compression
// transforms over an architecture, budget matching, densification and
// aliveness validation.

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "chansparse/errors.hpp"
#include "chansparse/tensor.hpp"

namespace chansparse {

/// Boolean n_out x n_in matrix naming which input channels feed each output
/// channel. The same pattern applies at every spatial kernel position.
class ConnectivityMask {
 public:
  ConnectivityMask() = default;
  /// All-inactive mask.
  ConnectivityMask(std::size_t n_in, std::size_t n_out, std::uint64_t seed = 0);

  std::size_t n_in() const { return n_in_; }
  std::size_t n_out() const { return n_out_; }
  std::uint64_t seed() const { return seed_; }
  void set_seed(std::uint64_t seed) { seed_ = seed; }

  bool active(std::size_t out, std::size_t in) const {
    return bits_[out * n_in_ + in] != 0;
  }
  void set(std::size_t out, std::size_t in, bool value = true);

  std::size_t active_count() const;
  double density() const;
  bool is_full() const { return active_count() == bits_.size(); }
  std::size_t row_count(std::size_t out) const;
  std::size_t column_count(std::size_t in) const;
  /// Active input channels of `out`, ascending.
  std::vector<std::uint32_t> row_indices(std::size_t out) const;

  /// Connection equality; the recorded seed is not compared.
  bool same_connections(const ConnectivityMask& other) const {
    return n_in_ == other.n_in_ && n_out_ == other.n_out_ &&
           bits_ == other.bits_;
  }

 private:
  std::size_t n_in_ = 0;
  std::size_t n_out_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<std::uint8_t> bits_;
};

struct ConvSpec {
  std::size_t out_channels = 1;
  std::size_t kernel_h = 3;
  std::size_t kernel_w = 3;
  std::size_t stride = 1;
  Padding padding = Padding::Same;
  bool batch_norm = true;
};
struct MaxPoolSpec {};
struct FlattenSpec {};
struct FcSpec {
  std::size_t out_features = 1;
};
struct SoftmaxXentSpec {};

using LayerSpec =
    std::variant<ConvSpec, MaxPoolSpec, FlattenSpec, FcSpec, SoftmaxXentSpec>;

/// Sequential layer stack. Every conv is followed by optional batch norm and
/// a ReLU; every FC except the one feeding the loss is followed by a ReLU.
struct ArchSpec {
  std::size_t in_channels = 1;
  std::size_t in_height = 28;
  std::size_t in_width = 28;
  std::size_t classes = 10;
  std::vector<LayerSpec> layers;
};

/// One conv layer's channel interface.
struct ConvInterface {
  std::size_t layer_index = 0;  // position in ArchSpec::layers
  std::size_t n_in = 0;
  std::size_t n_out = 0;
  std::size_t kernel_h = 0;
  std::size_t kernel_w = 0;
  std::size_t out_h = 0;
  std::size_t out_w = 0;
};

/// Throws ConfigError (naming the layer) unless shapes chain end to end, the
/// last FC emits `classes` features and exactly one loss layer sits last.
void validate_arch(const ArchSpec& arch);
std::vector<ConvInterface> conv_interfaces(const ArchSpec& arch);

std::string arch_to_json(const ArchSpec& arch);
/// Throws ConfigError with a `layers[i].field` style diagnostic.
ArchSpec arch_from_json(const std::string& text);

enum class TransformKind { DepthMultiplier, SparseRandom, Hybrid };
enum class Sampler { FixedFanIn, Bernoulli };

std::string to_string(TransformKind kind);
TransformKind transform_kind_from_string(const std::string& name);

/// Compression directive. `alpha` is the filter fraction for
/// DepthMultiplier and the connection fraction for SparseRandom; Hybrid
/// applies `depth` as filter fraction, then `alpha` as connection fraction.
struct TransformSpec {
  TransformKind kind = TransformKind::SparseRandom;
  double alpha = 1.0;
  double depth = 1.0;
  std::uint64_t seed = 0;
  Sampler sampler = Sampler::FixedFanIn;
};

void validate_alpha(double alpha, const char* what = "alpha");

/// max(1, ceil(fraction * n)) with a small tolerance so that exact products
/// such as 0.4 * 5 do not round up past the integer.
std::size_t scaled_count(double fraction, std::size_t n);

ConnectivityMask full_mask(std::size_t n_in, std::size_t n_out);

/// FixedFanIn: every output row gets exactly max(1, ceil(alpha * n_in))
/// uniformly chosen inputs. Bernoulli: every entry is active with
/// probability alpha, empty rows receive one uniform input. Both samplers
/// then repair each empty column by connecting it to one uniformly chosen
/// output row. Deterministic in (n_in, n_out, alpha, seed, sampler).
ConnectivityMask sparse_random_mask(std::size_t n_in, std::size_t n_out,
                                    double alpha, std::uint64_t seed,
                                    Sampler sampler = Sampler::FixedFanIn);

/// Activates min(additional, #inactive) uniformly chosen inactive entries.
ConnectivityMask densify(const ConnectivityMask& mask, std::size_t additional,
                         std::mt19937_64& rng);

ArchSpec depth_multiplier_arch(const ArchSpec& arch, double alpha);

struct TransformedArch {
  ArchSpec arch;
  std::vector<ConnectivityMask> masks;  // one per conv layer, in order
};

std::vector<ConnectivityMask> full_masks(const ArchSpec& arch);

/// Connection fraction actually used for one conv interface: alpha, or
/// sqrt(alpha) when either side has a single channel.
double interface_fraction(const ConvInterface& conv, double alpha);

/// Channel counts unchanged; each conv interface gets a sparse random mask
/// at interface_fraction(). Layer i draws from seed mix_seed(seed, i).
TransformedArch sparsify_arch(const ArchSpec& arch, double alpha,
                              std::uint64_t seed,
                              Sampler sampler = Sampler::FixedFanIn);

TransformedArch apply_transform(const ArchSpec& arch, const TransformSpec& spec);

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

/// Sum over conv layers of kH * kW * active connections.
std::int64_t conv_weight_count(const ArchSpec& arch,
                               const std::vector<ConnectivityMask>& masks);

class UnreachableBudget : public ConfigError {
 public:
  UnreachableBudget(std::int64_t target, std::int64_t minimum);
  std::int64_t minimum() const { return minimum_; }

 private:
  std::int64_t minimum_;
};

struct BudgetMatch {
  TransformSpec spec;
  /// Connection fraction both schemes aim for; for DepthMultiplier the
  /// filter fraction in `spec.alpha` is its square root.
  double fraction = 1.0;
  std::int64_t conv_weights = 0;
};

/// Largest connection fraction whose conv weight count does not exceed
/// `target_weights`, found by bisection. SparseRandom is searched on the
/// pre-repair (fixed fan-in) count, which is monotone in alpha.
BudgetMatch match_budget(const ArchSpec& arch, std::int64_t target_weights,
                         TransformKind kind, std::uint64_t seed = 0);

enum class DeadSide { NoIncoming, NoOutgoing };

struct DeadChannel {
  std::size_t conv = 0;     // index into the conv-layer list
  std::size_t channel = 0;  // output channel (NoIncoming) or input channel
  DeadSide side = DeadSide::NoIncoming;
  friend bool operator==(const DeadChannel&, const DeadChannel&) = default;
};

struct AlivenessReport {
  bool ok = true;
  std::vector<DeadChannel> dead;
};

AlivenessReport validate_aliveness(const ArchSpec& arch,
                                   const std::vector<ConnectivityMask>& masks);

/// {n_in, n_out, seed, active: [[out, in], ...]} with pairs sorted.
std::string mask_to_json(const ConnectivityMask& mask);
ConnectivityMask mask_from_json(const std::string& text);

}  // namespace chansparse
