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

// Sequential layer stack built from an ArchSpec plus one ConnectivityMask per
// conv layer. Backward passes are written per layer; parameter gradients
// accumulate into Param::grad until zero_grad().

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "chansparse/connectivity.hpp"
#include "chansparse/conv.hpp"
#include "chansparse/tensor.hpp"

namespace chansparse {

template <typename T>
struct Param {
  std::string name;
  std::vector<T> value;
  std::vector<T> grad;
  std::vector<T> velocity;

  Param() = default;
  Param(std::string n, std::vector<T> v)
      : name(std::move(n)), value(std::move(v)),
        grad(value.size(), T{0}), velocity(value.size(), T{0}) {}
};

/// Non-trainable state that still belongs in a checkpoint.
template <typename T>
struct NamedBuffer {
  std::string name;
  std::vector<T>* data;
};

enum class ConvPath { Auto, Dense, Sparse };
enum class NewConnectionInit { Fresh, Zero };

template <typename T>
class Layer {
 public:
  virtual ~Layer() = default;
  virtual std::unique_ptr<Layer> clone() const = 0;
  virtual std::string kind() const = 0;
  virtual Tensor4<T> forward(const Tensor4<T>& x, Mode mode) = 0;
  /// Requires a preceding train-mode forward.
  virtual Tensor4<T> backward(const Tensor4<T>& grad_out) = 0;
  virtual void collect_params(std::vector<Param<T>*>&) {}
  virtual void collect_buffers(std::vector<NamedBuffer<T>>& out) {
    for (Param<T>* p : params_of(*this)) out.push_back({p->name, &p->value});
  }

 private:
  static std::vector<Param<T>*> params_of(Layer& l) {
    std::vector<Param<T>*> v;
    l.collect_params(v);
    return v;
  }
};

/// Channel-sparse convolution plus per-output bias. Weights are stored
/// compactly (one kH*kW tap block per active connection).
template <typename T>
class ConvLayer final : public Layer<T> {
 public:
  ConvLayer(const std::string& name, const ConvSpec& spec,
            ConnectivityMask mask, std::mt19937_64& rng);

  std::unique_ptr<Layer<T>> clone() const override {
    return std::make_unique<ConvLayer>(*this);
  }
  std::string kind() const override { return "conv"; }
  Tensor4<T> forward(const Tensor4<T>& x, Mode mode) override;
  Tensor4<T> backward(const Tensor4<T>& grad_out) override;
  void collect_params(std::vector<Param<T>*>& out) override {
    out.push_back(&weight_);
    out.push_back(&bias_);
  }

  const ConnectivityMask& mask() const { return mask_; }
  const SlotIndex& slots() const { return slots_; }
  const ConvWindow& window() const { return window_; }
  std::size_t n_in() const { return mask_.n_in(); }
  std::size_t n_out() const { return mask_.n_out(); }
  double init_std() const { return init_std_; }
  Param<T>& weight() { return weight_; }
  const Param<T>& weight() const { return weight_; }
  Param<T>& bias() { return bias_; }
  const Param<T>& bias() const { return bias_; }

  void set_path(ConvPath path) { path_ = path; }
  ConvPath path() const { return path_; }
  /// Path the next forward will take.
  bool uses_dense_path() const;

  /// Weights expanded to (out, in, kH, kW) with zeros at inactive positions.
  KernelStack<T> dense_kernel() const;

  /// Switches to a superset mask. Existing slots keep their weights and
  /// optimizer state; new slots are drawn at init_std() or zeroed.
  void grow(const ConnectivityMask& superset, NewConnectionInit init,
            std::mt19937_64& rng);

  /// Reorders channels: new output k is old output out_perm[k], new input m
  /// is old input in_perm[m].
  void permute(std::span<const std::uint32_t> out_perm,
               std::span<const std::uint32_t> in_perm);

 private:
  ConnectivityMask mask_;
  SlotIndex slots_;
  ConvWindow window_;
  double init_std_ = 0.0;
  Param<T> weight_;
  Param<T> bias_;
  ConvPath path_ = ConvPath::Auto;
  Tensor4<T> input_;
};

template <typename T>
class BatchNormLayer final : public Layer<T> {
 public:
  BatchNormLayer(const std::string& name, std::size_t channels,
                 BatchNormOptions options = {});

  std::unique_ptr<Layer<T>> clone() const override {
    return std::make_unique<BatchNormLayer>(*this);
  }
  std::string kind() const override { return "batch_norm"; }
  Tensor4<T> forward(const Tensor4<T>& x, Mode mode) override;
  Tensor4<T> backward(const Tensor4<T>& grad_out) override;
  void collect_params(std::vector<Param<T>*>& out) override {
    out.push_back(&gamma_);
    out.push_back(&beta_);
  }
  void collect_buffers(std::vector<NamedBuffer<T>>& out) override {
    out.push_back({gamma_.name, &gamma_.value});
    out.push_back({beta_.name, &beta_.value});
    out.push_back({name_ + ".running_mean", &running_mean_});
    out.push_back({name_ + ".running_var", &running_var_});
  }

  Param<T>& gamma() { return gamma_; }
  Param<T>& beta() { return beta_; }
  std::vector<T>& running_mean() { return running_mean_; }
  std::vector<T>& running_var() { return running_var_; }
  void permute(std::span<const std::uint32_t> perm);

 private:
  std::string name_;
  BatchNormOptions options_;
  Param<T> gamma_;
  Param<T> beta_;
  std::vector<T> running_mean_;
  std::vector<T> running_var_;
  BatchNormCache<T> cache_;
};

template <typename T>
class ReluLayer final : public Layer<T> {
 public:
  std::unique_ptr<Layer<T>> clone() const override {
    return std::make_unique<ReluLayer>(*this);
  }
  std::string kind() const override { return "relu"; }
  Tensor4<T> forward(const Tensor4<T>& x, Mode mode) override;
  Tensor4<T> backward(const Tensor4<T>& grad_out) override;

 private:
  Tensor4<T> output_;
};

template <typename T>
class MaxPoolLayer final : public Layer<T> {
 public:
  std::unique_ptr<Layer<T>> clone() const override {
    return std::make_unique<MaxPoolLayer>(*this);
  }
  std::string kind() const override { return "maxpool"; }
  Tensor4<T> forward(const Tensor4<T>& x, Mode mode) override;
  Tensor4<T> backward(const Tensor4<T>& grad_out) override;

 private:
  Shape4 input_shape_{};
  std::vector<std::uint32_t> argmax_;
};

/// (N, C, H, W) -> (N, C*H*W, 1, 1); channel-major feature order.
template <typename T>
class FlattenLayer final : public Layer<T> {
 public:
  std::unique_ptr<Layer<T>> clone() const override {
    return std::make_unique<FlattenLayer>(*this);
  }
  std::string kind() const override { return "flatten"; }
  Tensor4<T> forward(const Tensor4<T>& x, Mode mode) override;
  Tensor4<T> backward(const Tensor4<T>& grad_out) override;

 private:
  Shape4 input_shape_{};
};

/// Fully connected layer over (N, D, 1, 1) tensors; weight is D x K.
template <typename T>
class FcLayer final : public Layer<T> {
 public:
  FcLayer(const std::string& name, std::size_t in_features,
          std::size_t out_features, double init_std, std::mt19937_64& rng);

  std::unique_ptr<Layer<T>> clone() const override {
    return std::make_unique<FcLayer>(*this);
  }
  std::string kind() const override { return "fc"; }
  Tensor4<T> forward(const Tensor4<T>& x, Mode mode) override;
  Tensor4<T> backward(const Tensor4<T>& grad_out) override;
  void collect_params(std::vector<Param<T>*>& out) override {
    out.push_back(&weight_);
    out.push_back(&bias_);
  }

  std::size_t in_features() const { return in_; }
  std::size_t out_features() const { return out_; }
  Param<T>& weight() { return weight_; }
  const Param<T>& weight() const { return weight_; }
  Param<T>& bias() { return bias_; }
  const Param<T>& bias() const { return bias_; }

  /// Input features form perm.size() contiguous blocks of `block` features;
  /// new block k takes the rows of old block perm[k].
  void permute_input_blocks(std::span<const std::uint32_t> perm,
                            std::size_t block);
  /// New output k takes old output perm[k].
  void permute_outputs(std::span<const std::uint32_t> perm);

 private:
  std::size_t in_ = 0;
  std::size_t out_ = 0;
  Param<T> weight_;
  Param<T> bias_;
  Matrix<T> input_;
};

template <typename T>
class Network {
 public:
  /// `masks` holds one mask per conv layer, matching conv_interfaces(arch).
  Network(ArchSpec arch, std::vector<ConnectivityMask> masks,
          std::uint64_t seed);
  /// Dense network (full masks).
  Network(ArchSpec arch, std::uint64_t seed);

  Network(const Network& other);
  Network& operator=(const Network& other);
  Network(Network&&) noexcept = default;
  Network& operator=(Network&&) noexcept = default;
  ~Network() = default;

  const ArchSpec& arch() const { return arch_; }
  std::uint64_t seed() const { return seed_; }
  std::vector<ConnectivityMask> masks() const;

  /// Returns logits (N x classes).
  Matrix<T> forward(const Tensor4<T>& batch, Mode mode);
  /// Back-propagates dlogits from the last train-mode forward; returns the
  /// gradient with respect to the input batch.
  Tensor4<T> backward(const Matrix<T>& dlogits);
  /// Row-wise argmax of eval-mode logits, first index on ties.
  std::vector<std::int32_t> predict(const Tensor4<T>& batch);

  std::vector<Param<T>*> params();
  /// Parameters and running statistics in declaration order.
  std::vector<NamedBuffer<T>> state();
  void zero_grad();
  std::size_t parameter_count();

  std::vector<ConvLayer<T>*> conv_layers();
  std::vector<BatchNormLayer<T>*> batch_norm_layers();
  std::vector<FcLayer<T>*> fc_layers();
  /// The final FC layer feeding the loss.
  FcLayer<T>& classifier();

  std::size_t layer_count() const { return layers_.size(); }
  Layer<T>& layer(std::size_t i) { return *layers_[i]; }

  void set_conv_path(ConvPath path);
  /// L2 norm of every layer's output from the most recent forward.
  const std::vector<double>& activation_norms() const { return norms_; }

 private:
  ArchSpec arch_;
  std::uint64_t seed_ = 0;
  std::vector<std::unique_ptr<Layer<T>>> layers_;
  std::vector<double> norms_;
};

template <typename T>
std::vector<std::int32_t> argmax_rows(const Matrix<T>& logits);

}  // namespace chansparse
