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

#include "chansparse/network.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace chansparse {

namespace {

template <typename T>
std::vector<T> normal_values(std::size_t count, double stddev,
                             std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  std::vector<T> v(count);
  for (T& x : v) x = static_cast<T>(dist(rng));
  return v;
}

template <typename T>
double l2_norm(std::span<const T> data) {
  double s = 0.0;
  for (T v : data) s += static_cast<double>(v) * static_cast<double>(v);
  return std::sqrt(s);
}

void check_permutation(std::span<const std::uint32_t> perm, std::size_t n,
                       const char* axis) {
  if (perm.size() != n) {
    throw ShapeError(axis, "permutation has " + std::to_string(perm.size()) +
                               " entries, layer has " + std::to_string(n));
  }
  std::vector<bool> seen(n, false);
  for (std::uint32_t p : perm) {
    if (p >= n || seen[p]) throw ShapeError(axis, "not a permutation");
    seen[p] = true;
  }
}

template <typename T>
void permute_blocks(std::vector<T>& v, std::span<const std::uint32_t> perm,
                    std::size_t block) {
  if (v.empty()) return;
  std::vector<T> out(v.size());
  for (std::size_t k = 0; k < perm.size(); ++k) {
    std::copy_n(v.begin() + static_cast<std::ptrdiff_t>(perm[k] * block), block,
                out.begin() + static_cast<std::ptrdiff_t>(k * block));
  }
  v = std::move(out);
}

}  // namespace

// ---------------------------------------------------------------- ConvLayer

template <typename T>
ConvLayer<T>::ConvLayer(const std::string& name, const ConvSpec& spec,
                        ConnectivityMask mask, std::mt19937_64& rng)
    : mask_(std::move(mask)),
      slots_(SlotIndex::from_mask(mask_)),
      window_{spec.kernel_h, spec.kernel_w, spec.stride, spec.padding} {
  if (mask_.n_out() != spec.out_channels) {
    throw ShapeError("out_channels", name + ": mask has " +
                                         std::to_string(mask_.n_out()) +
                                         " rows, layer has " +
                                         std::to_string(spec.out_channels) +
                                         " output channels");
  }
  const double mean_fan_in = static_cast<double>(slots_.slots()) /
                             static_cast<double>(mask_.n_out());
  init_std_ = std::sqrt(2.0 / (static_cast<double>(window_.taps()) *
                               std::max(mean_fan_in, 1.0)));
  weight_ = Param<T>(name + ".weight",
                     normal_values<T>(slots_.slots() * window_.taps(),
                                      init_std_, rng));
  bias_ = Param<T>(name + ".bias", std::vector<T>(mask_.n_out(), T{0}));
}

template <typename T>
bool ConvLayer<T>::uses_dense_path() const {
  switch (path_) {
    case ConvPath::Dense: return true;
    case ConvPath::Sparse: return false;
    case ConvPath::Auto: break;
  }
  return slots_.slots() == mask_.n_in() * mask_.n_out();
}

template <typename T>
KernelStack<T> ConvLayer<T>::dense_kernel() const {
  KernelStack<T> k(mask_.n_out(), mask_.n_in(), window_.kernel_h,
                   window_.kernel_w);
  const std::size_t taps = window_.taps();
  for (std::size_t o = 0; o < mask_.n_out(); ++o) {
    for (std::uint32_t s = slots_.offsets[o]; s < slots_.offsets[o + 1]; ++s) {
      std::copy_n(weight_.value.begin() + static_cast<std::ptrdiff_t>(s * taps),
                  taps, k.tap(o, slots_.channels[s]).begin());
    }
  }
  return k;
}

template <typename T>
Tensor4<T> ConvLayer<T>::forward(const Tensor4<T>& x, Mode mode) {
  if (x.shape().c != mask_.n_in()) {
    throw ShapeError("channels", "conv expects " + std::to_string(mask_.n_in()) +
                                     " input channels, got " +
                                     std::to_string(x.shape().c));
  }
  if (mode == Mode::Train) input_ = x;
  if (uses_dense_path()) {
    return dense_conv_forward(x, dense_kernel(), std::span<const T>(bias_.value),
                              window_.stride, window_.padding);
  }
  return sparse_conv_forward(x, std::span<const T>(weight_.value), slots_,
                             std::span<const T>(bias_.value), window_);
}

template <typename T>
Tensor4<T> ConvLayer<T>::backward(const Tensor4<T>& grad_out) {
  const std::size_t taps = window_.taps();
  ConvGrads<T> g;
  if (uses_dense_path()) {
    g = dense_conv_backward(input_, dense_kernel(), grad_out, window_.stride,
                            window_.padding);
    for (std::size_t o = 0; o < mask_.n_out(); ++o) {
      for (std::uint32_t s = slots_.offsets[o]; s < slots_.offsets[o + 1]; ++s) {
        const std::size_t src = (o * mask_.n_in() + slots_.channels[s]) * taps;
        for (std::size_t t = 0; t < taps; ++t) {
          weight_.grad[s * taps + t] += g.dw[src + t];
        }
      }
    }
  } else {
    g = sparse_conv_backward(input_, std::span<const T>(weight_.value), slots_,
                             grad_out, window_);
    for (std::size_t k = 0; k < g.dw.size(); ++k) weight_.grad[k] += g.dw[k];
  }
  for (std::size_t o = 0; o < g.db.size(); ++o) bias_.grad[o] += g.db[o];
  return std::move(g.dx);
}

template <typename T>
void ConvLayer<T>::grow(const ConnectivityMask& superset, NewConnectionInit init,
                        std::mt19937_64& rng) {
  if (superset.n_in() != mask_.n_in() || superset.n_out() != mask_.n_out()) {
    throw ShapeError("channels", "grown mask must keep the layer dimensions");
  }
  for (std::size_t o = 0; o < mask_.n_out(); ++o) {
    for (std::size_t i = 0; i < mask_.n_in(); ++i) {
      if (mask_.active(o, i) && !superset.active(o, i)) {
        throw ConfigError("grow: new mask drops an existing connection");
      }
    }
  }
  const std::size_t taps = window_.taps();
  SlotIndex next = SlotIndex::from_mask(superset);
  Param<T> w;
  w.name = weight_.name;
  w.value.resize(next.slots() * taps);
  w.grad.assign(next.slots() * taps, T{0});
  w.velocity.assign(next.slots() * taps, T{0});
  std::normal_distribution<double> dist(0.0, init_std_);
  for (std::size_t o = 0; o < mask_.n_out(); ++o) {
    std::uint32_t old_slot = slots_.offsets[o];
    for (std::uint32_t s = next.offsets[o]; s < next.offsets[o + 1]; ++s) {
      const auto dst = static_cast<std::ptrdiff_t>(s * taps);
      if (old_slot < slots_.offsets[o + 1] &&
          slots_.channels[old_slot] == next.channels[s]) {
        const auto src = static_cast<std::ptrdiff_t>(old_slot * taps);
        std::copy_n(weight_.value.begin() + src, taps, w.value.begin() + dst);
        std::copy_n(weight_.grad.begin() + src, taps, w.grad.begin() + dst);
        std::copy_n(weight_.velocity.begin() + src, taps,
                    w.velocity.begin() + dst);
        ++old_slot;
      } else {
        for (std::size_t t = 0; t < taps; ++t) {
          w.value[static_cast<std::size_t>(dst) + t] =
              init == NewConnectionInit::Fresh ? static_cast<T>(dist(rng)) : T{0};
        }
      }
    }
  }
  const std::uint64_t seed = mask_.seed();
  mask_ = superset;
  mask_.set_seed(seed);
  slots_ = std::move(next);
  weight_ = std::move(w);
}

template <typename T>
void ConvLayer<T>::permute(std::span<const std::uint32_t> out_perm,
                           std::span<const std::uint32_t> in_perm) {
  check_permutation(out_perm, mask_.n_out(), "out_channels");
  check_permutation(in_perm, mask_.n_in(), "in_channels");
  const std::size_t taps = window_.taps();
  ConnectivityMask next(mask_.n_in(), mask_.n_out(), mask_.seed());
  for (std::size_t k = 0; k < mask_.n_out(); ++k) {
    for (std::size_t m = 0; m < mask_.n_in(); ++m) {
      if (mask_.active(out_perm[k], in_perm[m])) next.set(k, m);
    }
  }
  SlotIndex next_slots = SlotIndex::from_mask(next);
  Param<T> w;
  w.name = weight_.name;
  w.value.resize(next_slots.slots() * taps);
  w.grad.resize(w.value.size());
  w.velocity.resize(w.value.size());
  for (std::size_t k = 0; k < mask_.n_out(); ++k) {
    const std::uint32_t old_out = out_perm[k];
    const auto row_begin = slots_.channels.begin() + slots_.offsets[old_out];
    const auto row_end = slots_.channels.begin() + slots_.offsets[old_out + 1];
    for (std::uint32_t s = next_slots.offsets[k]; s < next_slots.offsets[k + 1];
         ++s) {
      const std::uint32_t old_in = in_perm[next_slots.channels[s]];
      const auto it = std::lower_bound(row_begin, row_end, old_in);
      const auto src =
          static_cast<std::ptrdiff_t>(static_cast<std::size_t>(
                                          it - slots_.channels.begin()) *
                                      taps);
      const auto dst = static_cast<std::ptrdiff_t>(s * taps);
      std::copy_n(weight_.value.begin() + src, taps, w.value.begin() + dst);
      std::copy_n(weight_.grad.begin() + src, taps, w.grad.begin() + dst);
      std::copy_n(weight_.velocity.begin() + src, taps, w.velocity.begin() + dst);
    }
  }
  permute_blocks(bias_.value, out_perm, 1);
  permute_blocks(bias_.grad, out_perm, 1);
  permute_blocks(bias_.velocity, out_perm, 1);
  mask_ = std::move(next);
  slots_ = std::move(next_slots);
  weight_ = std::move(w);
}

// ------------------------------------------------------------ BatchNormLayer

template <typename T>
BatchNormLayer<T>::BatchNormLayer(const std::string& name, std::size_t channels,
                                  BatchNormOptions options)
    : name_(name),
      options_(options),
      gamma_(name + ".gamma", std::vector<T>(channels, T{1})),
      beta_(name + ".beta", std::vector<T>(channels, T{0})),
      running_mean_(channels, T{0}),
      running_var_(channels, T{1}) {
  if (!(options_.eps > 0.0)) throw ConfigError("batchnorm eps must be > 0");
}

template <typename T>
Tensor4<T> BatchNormLayer<T>::forward(const Tensor4<T>& x, Mode mode) {
  return batchnorm2d_forward(x, std::span<const T>(gamma_.value),
                             std::span<const T>(beta_.value),
                             std::span<T>(running_mean_),
                             std::span<T>(running_var_), options_, mode,
                             mode == Mode::Train ? &cache_ : nullptr);
}

template <typename T>
Tensor4<T> BatchNormLayer<T>::backward(const Tensor4<T>& grad_out) {
  BatchNormGrads<T> g =
      batchnorm2d_backward(grad_out, std::span<const T>(gamma_.value), cache_);
  for (std::size_t c = 0; c < g.dgamma.size(); ++c) {
    gamma_.grad[c] += g.dgamma[c];
    beta_.grad[c] += g.dbeta[c];
  }
  return std::move(g.dx);
}

template <typename T>
void BatchNormLayer<T>::permute(std::span<const std::uint32_t> perm) {
  check_permutation(perm, gamma_.value.size(), "channels");
  for (Param<T>* p : {&gamma_, &beta_}) {
    permute_blocks(p->value, perm, 1);
    permute_blocks(p->grad, perm, 1);
    permute_blocks(p->velocity, perm, 1);
  }
  permute_blocks(running_mean_, perm, 1);
  permute_blocks(running_var_, perm, 1);
}

// ------------------------------------------------------------ simple layers

template <typename T>
Tensor4<T> ReluLayer<T>::forward(const Tensor4<T>& x, Mode mode) {
  Tensor4<T> y = relu(x);
  if (mode == Mode::Train) output_ = y;
  return y;
}

template <typename T>
Tensor4<T> ReluLayer<T>::backward(const Tensor4<T>& grad_out) {
  Tensor4<T> g = grad_out;
  relu_backward_inplace<T>(std::as_const(output_).data(), g.data());
  return g;
}

template <typename T>
Tensor4<T> MaxPoolLayer<T>::forward(const Tensor4<T>& x, Mode mode) {
  PoolResult<T> r = maxpool2x2(x);
  if (mode == Mode::Train) {
    input_shape_ = x.shape();
    argmax_ = std::move(r.argmax);
  }
  return std::move(r.out);
}

template <typename T>
Tensor4<T> MaxPoolLayer<T>::backward(const Tensor4<T>& grad_out) {
  return maxpool2x2_backward(grad_out, std::span<const std::uint32_t>(argmax_),
                             input_shape_);
}

template <typename T>
Tensor4<T> FlattenLayer<T>::forward(const Tensor4<T>& x, Mode /*mode*/) {
  input_shape_ = x.shape();
  return Tensor4<T>(Shape4{x.shape().n, x.shape().sample(), 1, 1}, x.storage());
}

template <typename T>
Tensor4<T> FlattenLayer<T>::backward(const Tensor4<T>& grad_out) {
  return Tensor4<T>(input_shape_, grad_out.storage());
}

// ------------------------------------------------------------------ FcLayer

template <typename T>
FcLayer<T>::FcLayer(const std::string& name, std::size_t in_features,
                    std::size_t out_features, double init_std,
                    std::mt19937_64& rng)
    : in_(in_features),
      out_(out_features),
      weight_(name + ".weight",
              normal_values<T>(in_features * out_features, init_std, rng)),
      bias_(name + ".bias", std::vector<T>(out_features, T{0})) {}

template <typename T>
Tensor4<T> FcLayer<T>::forward(const Tensor4<T>& x, Mode mode) {
  const Shape4& s = x.shape();
  if (s.sample() != in_) {
    throw ShapeError("features", "fc expects " + std::to_string(in_) +
                                     " features, got " +
                                     std::to_string(s.sample()));
  }
  const Eigen::Map<const Matrix<T>> xm(x.data().data(),
                                       static_cast<Eigen::Index>(s.n),
                                       static_cast<Eigen::Index>(in_));
  const Eigen::Map<const Matrix<T>> wm(weight_.value.data(),
                                       static_cast<Eigen::Index>(in_),
                                       static_cast<Eigen::Index>(out_));
  if (mode == Mode::Train) input_ = xm;
  Matrix<T> y = matmul_bias<T>(xm, wm, std::span<const T>(bias_.value));
  return Tensor4<T>(Shape4{s.n, out_, 1, 1},
                    std::vector<T>(y.data(), y.data() + y.size()));
}

template <typename T>
Tensor4<T> FcLayer<T>::backward(const Tensor4<T>& grad_out) {
  const std::size_t n = grad_out.shape().n;
  const Eigen::Map<const Matrix<T>> gm(grad_out.data().data(),
                                       static_cast<Eigen::Index>(n),
                                       static_cast<Eigen::Index>(out_));
  const Eigen::Map<const Matrix<T>> wm(weight_.value.data(),
                                       static_cast<Eigen::Index>(in_),
                                       static_cast<Eigen::Index>(out_));
  MatmulGrads<T> g = matmul_bias_backward<T>(input_, wm, gm);
  for (std::size_t k = 0; k < weight_.grad.size(); ++k) {
    weight_.grad[k] += g.dw.data()[k];
  }
  for (std::size_t k = 0; k < out_; ++k) bias_.grad[k] += g.db[k];
  return Tensor4<T>(Shape4{n, in_, 1, 1},
                    std::vector<T>(g.dx.data(), g.dx.data() + g.dx.size()));
}

template <typename T>
void FcLayer<T>::permute_input_blocks(std::span<const std::uint32_t> perm,
                                      std::size_t block) {
  if (perm.size() * block != in_) {
    throw ShapeError("features", "block permutation does not cover fc input");
  }
  check_permutation(perm, perm.size(), "features");
  permute_blocks(weight_.value, perm, block * out_);
  permute_blocks(weight_.grad, perm, block * out_);
  permute_blocks(weight_.velocity, perm, block * out_);
}

template <typename T>
void FcLayer<T>::permute_outputs(std::span<const std::uint32_t> perm) {
  check_permutation(perm, out_, "features");
  auto remap = [&](std::vector<T>& v) {
    std::vector<T> out(v.size());
    for (std::size_t d = 0; d < in_; ++d) {
      for (std::size_t k = 0; k < out_; ++k) out[d * out_ + k] = v[d * out_ + perm[k]];
    }
    v = std::move(out);
  };
  remap(weight_.value);
  remap(weight_.grad);
  remap(weight_.velocity);
  for (std::vector<T>* v : {&bias_.value, &bias_.grad, &bias_.velocity}) {
    permute_blocks(*v, perm, 1);
  }
}

// ------------------------------------------------------------------ Network

template <typename T>
Network<T>::Network(ArchSpec arch, std::uint64_t seed)
    : Network(arch, full_masks(arch), seed) {}

template <typename T>
Network<T>::Network(ArchSpec arch, std::vector<ConnectivityMask> masks,
                    std::uint64_t seed)
    : arch_(std::move(arch)), seed_(seed) {
  const auto convs = conv_interfaces(arch_);
  if (masks.size() != convs.size()) {
    throw ShapeError("masks", "architecture has " +
                                  std::to_string(convs.size()) +
                                  " conv layers, got " +
                                  std::to_string(masks.size()) + " masks");
  }
  std::mt19937_64 rng(seed);
  std::size_t conv_i = 0, fc_i = 0;
  std::size_t features = 0;
  std::size_t c = arch_.in_channels, h = arch_.in_height, w = arch_.in_width;
  for (std::size_t li = 0; li < arch_.layers.size(); ++li) {
    const LayerSpec& spec = arch_.layers[li];
    if (const auto* conv = std::get_if<ConvSpec>(&spec)) {
      const ConvInterface& ci = convs[conv_i];
      if (masks[conv_i].n_in() != ci.n_in || masks[conv_i].n_out() != ci.n_out) {
        throw ShapeError("channels", "mask " + std::to_string(conv_i) + " is " +
                                         std::to_string(masks[conv_i].n_out()) +
                                         "x" + std::to_string(masks[conv_i].n_in()) +
                                         ", layer needs " + std::to_string(ci.n_out) +
                                         "x" + std::to_string(ci.n_in));
      }
      const std::string name = "conv" + std::to_string(conv_i);
      layers_.push_back(std::make_unique<ConvLayer<T>>(name, *conv,
                                                       masks[conv_i], rng));
      if (conv->batch_norm) {
        layers_.push_back(std::make_unique<BatchNormLayer<T>>(name + ".bn",
                                                              conv->out_channels));
      }
      layers_.push_back(std::make_unique<ReluLayer<T>>());
      c = ci.n_out;
      h = ci.out_h;
      w = ci.out_w;
      ++conv_i;
    } else if (std::holds_alternative<MaxPoolSpec>(spec)) {
      layers_.push_back(std::make_unique<MaxPoolLayer<T>>());
      h = (h + 1) / 2;
      w = (w + 1) / 2;
    } else if (std::holds_alternative<FlattenSpec>(spec)) {
      layers_.push_back(std::make_unique<FlattenLayer<T>>());
      features = c * h * w;
    } else if (const auto* fc = std::get_if<FcSpec>(&spec)) {
      const bool head = std::holds_alternative<SoftmaxXentSpec>(arch_.layers[li + 1]);
      const double stddev = std::sqrt((head ? 1.0 : 2.0) / static_cast<double>(features));
      layers_.push_back(std::make_unique<FcLayer<T>>("fc" + std::to_string(fc_i),
                                                     features, fc->out_features,
                                                     stddev, rng));
      if (!head) layers_.push_back(std::make_unique<ReluLayer<T>>());
      features = fc->out_features;
      ++fc_i;
    }
  }
}

template <typename T>
Network<T>::Network(const Network& other)
    : arch_(other.arch_), seed_(other.seed_), norms_(other.norms_) {
  layers_.reserve(other.layers_.size());
  for (const auto& l : other.layers_) layers_.push_back(l->clone());
}

template <typename T>
Network<T>& Network<T>::operator=(const Network& other) {
  if (this != &other) {
    Network copy(other);
    *this = std::move(copy);
  }
  return *this;
}

template <typename T>
std::vector<ConnectivityMask> Network<T>::masks() const {
  std::vector<ConnectivityMask> out;
  for (const auto& l : layers_) {
    if (const auto* conv = dynamic_cast<const ConvLayer<T>*>(l.get())) {
      out.push_back(conv->mask());
    }
  }
  return out;
}

template <typename T>
Matrix<T> Network<T>::forward(const Tensor4<T>& batch, Mode mode) {
  const Shape4& s = batch.shape();
  if (s.c != arch_.in_channels) {
    throw ShapeError("channels", "network expects " +
                                     std::to_string(arch_.in_channels) +
                                     " input channels, got " + std::to_string(s.c));
  }
  if (s.h != arch_.in_height) throw ShapeError("height", "input height mismatch");
  if (s.w != arch_.in_width) throw ShapeError("width", "input width mismatch");
  norms_.clear();
  Tensor4<T> x = batch;
  for (auto& layer : layers_) {
    x = layer->forward(x, mode);
    norms_.push_back(l2_norm<T>(x.data()));
  }
  return Eigen::Map<const Matrix<T>>(x.data().data(),
                                     static_cast<Eigen::Index>(x.shape().n),
                                     static_cast<Eigen::Index>(x.shape().c));
}

template <typename T>
Tensor4<T> Network<T>::backward(const Matrix<T>& dlogits) {
  Tensor4<T> g(Shape4{static_cast<std::size_t>(dlogits.rows()),
                      static_cast<std::size_t>(dlogits.cols()), 1, 1},
               std::vector<T>(dlogits.data(), dlogits.data() + dlogits.size()));
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
    g = (*it)->backward(g);
  }
  return g;
}

template <typename T>
std::vector<std::int32_t> argmax_rows(const Matrix<T>& logits) {
  std::vector<std::int32_t> out(static_cast<std::size_t>(logits.rows()));
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < logits.cols(); ++j) {
      if (logits(i, j) > logits(i, best)) best = j;
    }
    out[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(best);
  }
  return out;
}

template <typename T>
std::vector<std::int32_t> Network<T>::predict(const Tensor4<T>& batch) {
  return argmax_rows(forward(batch, Mode::Eval));
}

template <typename T>
std::vector<Param<T>*> Network<T>::params() {
  std::vector<Param<T>*> out;
  for (auto& l : layers_) l->collect_params(out);
  return out;
}

template <typename T>
std::vector<NamedBuffer<T>> Network<T>::state() {
  std::vector<NamedBuffer<T>> out;
  for (auto& l : layers_) l->collect_buffers(out);
  return out;
}

template <typename T>
void Network<T>::zero_grad() {
  for (Param<T>* p : params()) std::fill(p->grad.begin(), p->grad.end(), T{0});
}

template <typename T>
std::size_t Network<T>::parameter_count() {
  std::size_t n = 0;
  for (Param<T>* p : params()) n += p->value.size();
  return n;
}

template <typename T>
std::vector<ConvLayer<T>*> Network<T>::conv_layers() {
  std::vector<ConvLayer<T>*> out;
  for (auto& l : layers_) {
    if (auto* c = dynamic_cast<ConvLayer<T>*>(l.get())) out.push_back(c);
  }
  return out;
}

template <typename T>
std::vector<BatchNormLayer<T>*> Network<T>::batch_norm_layers() {
  std::vector<BatchNormLayer<T>*> out;
  for (auto& l : layers_) {
    if (auto* b = dynamic_cast<BatchNormLayer<T>*>(l.get())) out.push_back(b);
  }
  return out;
}

template <typename T>
std::vector<FcLayer<T>*> Network<T>::fc_layers() {
  std::vector<FcLayer<T>*> out;
  for (auto& l : layers_) {
    if (auto* f = dynamic_cast<FcLayer<T>*>(l.get())) out.push_back(f);
  }
  return out;
}

template <typename T>
FcLayer<T>& Network<T>::classifier() {
  return *fc_layers().back();
}

template <typename T>
void Network<T>::set_conv_path(ConvPath path) {
  for (ConvLayer<T>* c : conv_layers()) c->set_path(path);
}

#define CHANSPARSE_INSTANTIATE_NETWORK(T)                           \
  template class ConvLayer<T>;                                     \
  template class BatchNormLayer<T>;                                \
  template class ReluLayer<T>;                                     \
  template class MaxPoolLayer<T>;                                  \
  template class FlattenLayer<T>;                                  \
  template class FcLayer<T>;                                       \
  template class Network<T>;                                       \
  template std::vector<std::int32_t> argmax_rows(const Matrix<T>&);

CHANSPARSE_INSTANTIATE_NETWORK(float)
CHANSPARSE_INSTANTIATE_NETWORK(double)

#undef CHANSPARSE_INSTANTIATE_NETWORK

}  // namespace chansparse
