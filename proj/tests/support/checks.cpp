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

#include "checks.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "chansparse/conv.hpp"
#include "chansparse/network.hpp"
#include "chansparse/tensor.hpp"
#include "oracles.hpp"

namespace chansparse::checks {

using oracle::Gen;
using oracle::numeric_gradient;
using oracle::relative_error;

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Tensor4<double> as_tensor(const Shape4& s, const std::vector<double>& v) {
  return Tensor4<double>(s, v);
}

KernelStack<double> as_kernel(const ConvCase& c, const std::vector<double>& w) {
  KernelStack<double> k(c.c_out, c.c_in, c.kh, c.kw);
  std::copy(w.begin(), w.end(), k.data().begin());
  return k;
}

Shape4 conv_out_shape(const ConvCase& c) {
  return {c.n, c.c_out, oracle::extent(c.h, c.kh, c.stride, c.padding).out,
          oracle::extent(c.w, c.kw, c.stride, c.padding).out};
}

template <typename T>
Matrix<T> random_matrix(std::size_t r, std::size_t c, Gen& g) {
  Matrix<T> m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<T>(g.uniform(-1, 1));
  return m;
}

std::vector<double> flat(const Matrix<double>& m) {
  return std::vector<double>(m.data(), m.data() + m.size());
}

}  // namespace

ConvCase random_conv_case(std::uint64_t seed, std::size_t max_channels,
                          std::size_t max_extent) {
  Gen g(seed);
  ConvCase c{};
  c.n = g.size(1, 3);
  c.c_in = g.size(1, max_channels);
  c.c_out = g.size(1, max_channels);
  c.h = g.size(3, max_extent);
  c.w = g.size(3, max_extent);
  c.kh = g.size(1, 3);
  c.kw = g.size(1, 3);
  c.stride = g.size(1, 2);
  c.padding = g.coin() ? Padding::Same : Padding::Valid;
  return c;
}

std::string describe(const ConvCase& c) {
  std::ostringstream s;
  s << "n=" << c.n << " c_in=" << c.c_in << " c_out=" << c.c_out << " h=" << c.h
    << " w=" << c.w << " k=" << c.kh << "x" << c.kw << " stride=" << c.stride
    << (c.padding == Padding::Same ? " same" : " valid");
  return s.str();
}

template <typename T>
double full_mask_vs_dense(std::uint64_t seed) {
  Gen g(seed);
  const ConvCase c = random_conv_case(seed, 8, 12);
  const Shape4 xs{c.n, c.c_in, c.h, c.w};
  const auto x = oracle::random_tensor<T>(xs, g);
  KernelStack<T> k(c.c_out, c.c_in, c.kh, c.kw);
  for (T& v : k.data()) v = static_cast<T>(g.uniform(-1, 1));
  const auto bias = oracle::random_vector<T>(c.c_out, g);
  const SlotIndex slots = SlotIndex::from_mask(full_mask(c.c_in, c.c_out));
  const ConvWindow win{c.kh, c.kw, c.stride, c.padding};

  const auto yd = dense_conv_forward(x, k, std::span<const T>(bias), c.stride, c.padding);
  const auto ys = sparse_conv_forward(x, std::span<const T>(k.data()), slots,
                                      std::span<const T>(bias), win);
  const auto gy = oracle::random_tensor<T>(yd.shape(), g);
  const auto gd = dense_conv_backward(x, k, gy, c.stride, c.padding);
  const auto gs = sparse_conv_backward(x, std::span<const T>(k.data()), slots, gy, win);

  auto diff = [](std::span<const T> a, std::span<const T> b) {
    if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      m = std::max(m, std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i])));
    }
    return m;
  };
  if (!(yd.shape() == ys.shape())) return std::numeric_limits<double>::infinity();
  return std::max({diff(yd.data(), ys.data()), diff(gd.dx.data(), gs.dx.data()),
                   diff(gd.dw, gs.dw), diff(gd.db, gs.db)});
}

template double full_mask_vs_dense<float>(std::uint64_t);
template double full_mask_vs_dense<double>(std::uint64_t);

double gradcheck_dense_conv(std::uint64_t seed) {
  Gen g(seed);
  const ConvCase c = random_conv_case(seed);
  const Shape4 xs{c.n, c.c_in, c.h, c.w};
  std::vector<double> x = oracle::random_vector<double>(xs.size(), g);
  std::vector<double> w = oracle::random_vector<double>(c.c_out * c.c_in * c.kh * c.kw, g);
  std::vector<double> b = oracle::random_vector<double>(c.c_out, g);
  const auto r = oracle::random_vector<double>(conv_out_shape(c).size(), g);
  auto loss = [&] {
    const auto y = dense_conv_forward(as_tensor(xs, x), as_kernel(c, w),
                                      std::span<const double>(b), c.stride, c.padding);
    return dot(y.data(), r);
  };
  const auto an = dense_conv_backward(as_tensor(xs, x), as_kernel(c, w),
                                      as_tensor(conv_out_shape(c), r), c.stride, c.padding);
  return std::max({relative_error(oracle::to_double<double>(an.dx.data()), numeric_gradient(loss, x)),
                   relative_error(an.dw, numeric_gradient(loss, w)),
                   relative_error(an.db, numeric_gradient(loss, b))});
}

double gradcheck_sparse_conv(std::uint64_t seed) {
  Gen g(seed);
  const ConvCase c = random_conv_case(seed);
  const Shape4 xs{c.n, c.c_in, c.h, c.w};
  const ConnectivityMask mask =
      sparse_random_mask(c.c_in, c.c_out, g.uniform(0.05, 1.0), seed);
  const SlotIndex slots = SlotIndex::from_mask(mask);
  const ConvWindow win{c.kh, c.kw, c.stride, c.padding};
  std::vector<double> x = oracle::random_vector<double>(xs.size(), g);
  std::vector<double> w = oracle::random_vector<double>(slots.slots() * win.taps(), g);
  std::vector<double> b = oracle::random_vector<double>(c.c_out, g);
  const auto r = oracle::random_vector<double>(conv_out_shape(c).size(), g);
  auto loss = [&] {
    const auto y = sparse_conv_forward(as_tensor(xs, x), std::span<const double>(w),
                                       slots, std::span<const double>(b), win);
    return dot(y.data(), r);
  };
  const auto an = sparse_conv_backward(as_tensor(xs, x), std::span<const double>(w), slots,
                                       as_tensor(conv_out_shape(c), r), win);
  return std::max({relative_error(oracle::to_double<double>(an.dx.data()), numeric_gradient(loss, x)),
                   relative_error(an.dw, numeric_gradient(loss, w)),
                   relative_error(an.db, numeric_gradient(loss, b))});
}

double gradcheck_batchnorm(std::uint64_t seed) {
  Gen g(seed);
  const Shape4 s{g.size(2, 4), g.size(1, 4), g.size(1, 4), g.size(1, 4)};
  std::vector<double> x = oracle::random_vector<double>(s.size(), g, -2, 2);
  std::vector<double> gamma = oracle::random_vector<double>(s.c, g, 0.5, 1.5);
  std::vector<double> beta = oracle::random_vector<double>(s.c, g);
  const auto r = oracle::random_vector<double>(s.size(), g);
  BatchNormOptions opt;
  auto forward = [&](BatchNormCache<double>* cache) {
    std::vector<double> rm(s.c, 0.0), rv(s.c, 1.0);
    return batchnorm2d_forward(as_tensor(s, x), std::span<const double>(gamma),
                               std::span<const double>(beta), std::span<double>(rm),
                               std::span<double>(rv), opt, Mode::Train, cache);
  };
  auto loss = [&] { return dot(forward(nullptr).data(), r); };
  BatchNormCache<double> cache;
  forward(&cache);
  const auto an = batchnorm2d_backward(as_tensor(s, r), std::span<const double>(gamma), cache);
  return std::max({relative_error(oracle::to_double<double>(an.dx.data()), numeric_gradient(loss, x)),
                   relative_error(an.dgamma, numeric_gradient(loss, gamma)),
                   relative_error(an.dbeta, numeric_gradient(loss, beta))});
}

double gradcheck_maxpool(std::uint64_t seed) {
  Gen g(seed);
  const Shape4 s{g.size(1, 3), g.size(1, 3), g.size(1, 7), g.size(1, 7)};
  std::vector<double> x = oracle::random_vector<double>(s.size(), g);
  const Shape4 os{s.n, s.c, (s.h + 1) / 2, (s.w + 1) / 2};
  const auto r = oracle::random_vector<double>(os.size(), g);
  auto loss = [&] { return dot(maxpool2x2(as_tensor(s, x)).out.data(), r); };
  const auto fwd = maxpool2x2(as_tensor(s, x));
  const auto dx = maxpool2x2_backward(as_tensor(os, r),
                                      std::span<const std::uint32_t>(fwd.argmax), s);
  return relative_error(oracle::to_double<double>(dx.data()), numeric_gradient(loss, x));
}

double gradcheck_relu(std::uint64_t seed) {
  Gen g(seed);
  const Shape4 s{g.size(1, 3), g.size(1, 3), g.size(1, 5), g.size(1, 5)};
  std::vector<double> x(s.size());
  for (double& v : x) v = (g.coin() ? 1.0 : -1.0) * g.uniform(0.1, 1.0);
  const auto r = oracle::random_vector<double>(s.size(), g);
  auto loss = [&] { return dot(relu(as_tensor(s, x)).data(), r); };
  const auto y = relu(as_tensor(s, x));
  std::vector<double> dx = r;
  relu_backward_inplace<double>(y.data(), std::span<double>(dx));
  return relative_error(dx, numeric_gradient(loss, x));
}

double gradcheck_fc(std::uint64_t seed) {
  Gen g(seed);
  const std::size_t n = g.size(1, 4), d = g.size(1, 6), k = g.size(1, 6);
  Matrix<double> x = random_matrix<double>(n, d, g);
  Matrix<double> w = random_matrix<double>(d, k, g);
  std::vector<double> b = oracle::random_vector<double>(k, g);
  const Matrix<double> r = random_matrix<double>(n, k, g);
  std::vector<double> xv = flat(x), wv = flat(w);
  auto loss = [&] {
    const Matrix<double> xm = Eigen::Map<const Matrix<double>>(xv.data(), x.rows(), x.cols());
    const Matrix<double> wm = Eigen::Map<const Matrix<double>>(wv.data(), w.rows(), w.cols());
    return (matmul_bias(xm, wm, std::span<const double>(b)).array() * r.array()).sum();
  };
  const auto an = matmul_bias_backward(x, w, r);
  return std::max({relative_error(flat(an.dx), numeric_gradient(loss, xv)),
                   relative_error(flat(an.dw), numeric_gradient(loss, wv)),
                   relative_error(an.db, numeric_gradient(loss, b))});
}

double gradcheck_softmax_xent(std::uint64_t seed) {
  Gen g(seed);
  const std::size_t n = g.size(1, 5), k = g.size(2, 10);
  Matrix<double> logits = random_matrix<double>(n, k, g);
  logits *= 3.0;
  std::vector<std::int32_t> labels(n);
  for (auto& l : labels) l = static_cast<std::int32_t>(g.size(0, k - 1));
  std::vector<double> lv = flat(logits);
  auto loss = [&] {
    const Matrix<double> m = Eigen::Map<const Matrix<double>>(lv.data(), logits.rows(), logits.cols());
    return softmax_xent(m, std::span<const std::int32_t>(labels)).loss;
  };
  const auto an = softmax_xent(logits, std::span<const std::int32_t>(labels));
  return relative_error(flat(an.dlogits), numeric_gradient(loss, lv));
}

double gradcheck_network(std::uint64_t seed, std::size_t samples) {
  Gen g(seed);
  ArchSpec arch;
  arch.in_channels = g.size(1, 2);
  arch.in_height = 8;
  arch.in_width = 8;
  arch.classes = 3;
  arch.layers = {ConvSpec{g.size(2, 4), 3, 3, 1, Padding::Same, true}, MaxPoolSpec{},
                 ConvSpec{g.size(2, 4), 3, 3, 1, Padding::Same, g.coin()}, MaxPoolSpec{},
                 FlattenSpec{}, FcSpec{5}, FcSpec{3}, SoftmaxXentSpec{}};
  const TransformedArch t = sparsify_arch(arch, g.uniform(0.3, 1.0), seed);
  Network<double> net(t.arch, t.masks, seed);
  const Shape4 xs{3, arch.in_channels, 8, 8};
  const auto x = oracle::random_tensor<double>(xs, g);
  std::vector<std::int32_t> labels{0, 1, 2};
  auto loss = [&] {
    return softmax_xent(net.forward(x, Mode::Train), std::span<const std::int32_t>(labels)).loss;
  };
  net.zero_grad();
  net.backward(softmax_xent(net.forward(x, Mode::Train), std::span<const std::int32_t>(labels)).dlogits);

  std::vector<std::pair<Param<double>*, std::size_t>> picks;
  const auto params = net.params();
  std::size_t total = 0;
  for (auto* p : params) total += p->value.size();
  for (std::size_t s = 0; s < samples; ++s) {
    std::size_t k = g.size(0, total - 1);
    for (auto* p : params) {
      if (k < p->value.size()) {
        picks.emplace_back(p, k);
        break;
      }
      k -= p->value.size();
    }
  }
  std::vector<double> analytic, numeric;
  const double h = 1e-5;
  for (auto [p, k] : picks) {
    analytic.push_back(p->grad[k]);
    const double saved = p->value[k];
    p->value[k] = saved + h;
    const double up = loss();
    p->value[k] = saved - h;
    const double down = loss();
    p->value[k] = saved;
    numeric.push_back((up - down) / (2 * h));
  }
  return relative_error(analytic, numeric);
}

double sparse_vs_masked_oracle(std::uint64_t seed) {
  Gen g(seed);
  const ConvCase c = random_conv_case(seed, 6, 9);
  const Shape4 xs{c.n, c.c_in, c.h, c.w};
  const ConnectivityMask mask = sparse_random_mask(c.c_in, c.c_out, g.uniform(0.05, 1.0), seed);
  const SlotIndex slots = SlotIndex::from_mask(mask);
  const ConvWindow win{c.kh, c.kw, c.stride, c.padding};
  const auto x = oracle::random_vector<double>(xs.size(), g);
  const auto w = oracle::random_vector<double>(slots.slots() * win.taps(), g);
  const auto b = oracle::random_vector<double>(c.c_out, g);
  const auto y = sparse_conv_forward(as_tensor(xs, x), std::span<const double>(w), slots,
                                     std::span<const double>(b), win);
  const auto ref = oracle::naive_conv(x, xs, oracle::expand_compact(mask, w, win.taps()),
                                      c.c_out, c.kh, c.kw, b, c.stride, c.padding, nullptr);
  return oracle::max_abs_diff(oracle::to_double<double>(y.data()), ref);
}

}  // namespace chansparse::checks
