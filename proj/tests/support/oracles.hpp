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

// Reference implementations used only by tests. They share no code with the
// library beyond its public value types.

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "chansparse/connectivity.hpp"
#include "chansparse/tensor.hpp"

namespace chansparse::oracle {

/// Seeded generator for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}
  std::size_t size(std::size_t lo, std::size_t hi);  // inclusive
  double uniform(double lo, double hi);
  double normal();
  bool coin(double p = 0.5);
  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

template <typename T>
Tensor4<T> random_tensor(const Shape4& s, Gen& g, double lo = -1.0,
                         double hi = 1.0) {
  Tensor4<T> t(s);
  for (T& v : t.data()) v = static_cast<T>(g.uniform(lo, hi));
  return t;
}

template <typename T>
std::vector<T> random_vector(std::size_t n, Gen& g, double lo = -1.0,
                             double hi = 1.0) {
  std::vector<T> v(n);
  for (T& x : v) x = static_cast<T>(g.uniform(lo, hi));
  return v;
}

/// Output extent and leading pad: VALID (in - k) / s + 1; SAME ceil(in / s)
/// with total pad max((out - 1) * s + k - in, 0), the smaller half first.
struct Extent {
  std::size_t out;
  std::size_t pad;
};
Extent extent(std::size_t in, std::size_t k, std::size_t stride, Padding p);

/// Direct six-loop convolution. `w` is laid out (c_out, c_in, kh, kw).
std::vector<double> naive_conv(const std::vector<double>& x, const Shape4& xs,
                               const std::vector<double>& w, std::size_t c_out,
                               std::size_t kh, std::size_t kw,
                               const std::vector<double>& bias,
                               std::size_t stride, Padding padding,
                               Shape4* out_shape);

/// Dense (c_out, c_in, kh, kw) weights with zeros at inactive positions,
/// scattered from compact per-slot weights (row-major mask order).
std::vector<double> expand_compact(const ConnectivityMask& mask,
                                   const std::vector<double>& compact,
                                   std::size_t taps);

struct PoolOut {
  std::vector<double> out;
  std::vector<std::size_t> argmax;  // flat input index
};
/// 2x2/2 max pooling by scanning every window; -inf padding, first max wins.
PoolOut brute_maxpool(const std::vector<double>& x, const Shape4& s);

struct Counts {
  std::int64_t params = 0;  // excluding the classifier
  std::int64_t madds = 0;
  std::int64_t classifier_params = 0;
};
/// Walks every active connection, tap and output position one at a time.
Counts enumerate_cost(const ArchSpec& arch,
                      const std::vector<ConnectivityMask>& masks);

/// Decimal digit count of prod n_i! via log-gamma.
std::size_t factorial_product_digits(const std::vector<std::size_t>& n);

/// Central differences of f at every coordinate of x (x restored on exit).
std::vector<double> numeric_gradient(const std::function<double()>& f,
                                     std::vector<double>& x, double h = 1e-5);

/// ||a - b|| / (||a|| + ||b||), 0 when both vanish.
double relative_error(const std::vector<double>& a, const std::vector<double>& b);

template <typename T>
std::vector<double> to_double(std::span<const T> v) {
  return std::vector<double>(v.begin(), v.end());
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace chansparse::oracle
