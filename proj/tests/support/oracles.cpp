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

#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <variant>

namespace chansparse::oracle {

std::size_t Gen::size(std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
}

double Gen::uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng_);
}

double Gen::normal() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }

bool Gen::coin(double p) { return std::bernoulli_distribution(p)(rng_); }

Extent extent(std::size_t in, std::size_t k, std::size_t stride, Padding p) {
  if (p == Padding::Valid) return {(in - k) / stride + 1, 0};
  const std::size_t out = (in + stride - 1) / stride;
  const std::size_t need = (out - 1) * stride + k;
  const std::size_t total = need > in ? need - in : 0;
  return {out, total / 2};
}

std::vector<double> naive_conv(const std::vector<double>& x, const Shape4& xs,
                               const std::vector<double>& w, std::size_t c_out,
                               std::size_t kh, std::size_t kw,
                               const std::vector<double>& bias,
                               std::size_t stride, Padding padding,
                               Shape4* out_shape) {
  const Extent ey = extent(xs.h, kh, stride, padding);
  const Extent ex = extent(xs.w, kw, stride, padding);
  std::vector<double> y(xs.n * c_out * ey.out * ex.out, 0.0);
  for (std::size_t n = 0; n < xs.n; ++n)
    for (std::size_t o = 0; o < c_out; ++o)
      for (std::size_t oy = 0; oy < ey.out; ++oy)
        for (std::size_t ox = 0; ox < ex.out; ++ox) {
          double acc = bias.empty() ? 0.0 : bias[o];
          for (std::size_t i = 0; i < xs.c; ++i)
            for (std::size_t a = 0; a < kh; ++a)
              for (std::size_t b = 0; b < kw; ++b) {
                const long iy = static_cast<long>(oy * stride + a) -
                                static_cast<long>(ey.pad);
                const long ix = static_cast<long>(ox * stride + b) -
                                static_cast<long>(ex.pad);
                if (iy < 0 || ix < 0 || iy >= static_cast<long>(xs.h) ||
                    ix >= static_cast<long>(xs.w)) {
                  continue;
                }
                acc += x[((n * xs.c + i) * xs.h + iy) * xs.w + ix] *
                       w[((o * xs.c + i) * kh + a) * kw + b];
              }
          y[((n * c_out + o) * ey.out + oy) * ex.out + ox] = acc;
        }
  if (out_shape != nullptr) *out_shape = Shape4{xs.n, c_out, ey.out, ex.out};
  return y;
}

std::vector<double> expand_compact(const ConnectivityMask& mask,
                                   const std::vector<double>& compact,
                                   std::size_t taps) {
  std::vector<double> w(mask.n_out() * mask.n_in() * taps, 0.0);
  std::size_t slot = 0;
  for (std::size_t o = 0; o < mask.n_out(); ++o) {
    for (std::size_t i = 0; i < mask.n_in(); ++i) {
      if (!mask.active(o, i)) continue;
      for (std::size_t t = 0; t < taps; ++t) {
        w[(o * mask.n_in() + i) * taps + t] = compact[slot * taps + t];
      }
      ++slot;
    }
  }
  return w;
}

PoolOut brute_maxpool(const std::vector<double>& x, const Shape4& s) {
  const std::size_t oh = (s.h + 1) / 2, ow = (s.w + 1) / 2;
  PoolOut r;
  for (std::size_t n = 0; n < s.n; ++n)
    for (std::size_t c = 0; c < s.c; ++c)
      for (std::size_t y = 0; y < oh; ++y)
        for (std::size_t xo = 0; xo < ow; ++xo) {
          double best = -std::numeric_limits<double>::infinity();
          std::size_t arg = 0;
          bool found = false;
          for (std::size_t a = 0; a < 2; ++a)
            for (std::size_t b = 0; b < 2; ++b) {
              const std::size_t iy = 2 * y + a, ix = 2 * xo + b;
              if (iy >= s.h || ix >= s.w) continue;
              const std::size_t k = ((n * s.c + c) * s.h + iy) * s.w + ix;
              if (!found || x[k] > best) {
                best = x[k];
                arg = k;
                found = true;
              }
            }
          r.out.push_back(best);
          r.argmax.push_back(arg);
        }
  return r;
}

Counts enumerate_cost(const ArchSpec& arch,
                      const std::vector<ConnectivityMask>& masks) {
  Counts c;
  std::size_t ch = arch.in_channels, h = arch.in_height, w = arch.in_width;
  std::size_t conv = 0;
  std::size_t features = 0;
  std::size_t fc_left = 0;
  for (const LayerSpec& l : arch.layers) fc_left += std::holds_alternative<FcSpec>(l);
  for (const LayerSpec& l : arch.layers) {
    if (const auto* cs = std::get_if<ConvSpec>(&l)) {
      const ConnectivityMask& m = masks.at(conv++);
      const Extent ey = extent(h, cs->kernel_h, cs->stride, cs->padding);
      const Extent ex = extent(w, cs->kernel_w, cs->stride, cs->padding);
      for (std::size_t o = 0; o < m.n_out(); ++o)
        for (std::size_t i = 0; i < m.n_in(); ++i) {
          if (!m.active(o, i)) continue;
          for (std::size_t t = 0; t < cs->kernel_h * cs->kernel_w; ++t) {
            ++c.params;
            for (std::size_t p = 0; p < ey.out * ex.out; ++p) ++c.madds;
          }
        }
      for (std::size_t o = 0; o < m.n_out(); ++o) c.params += cs->batch_norm ? 3 : 1;
      ch = cs->out_channels;
      h = ey.out;
      w = ex.out;
    } else if (std::holds_alternative<MaxPoolSpec>(l)) {
      h = (h + 1) / 2;
      w = (w + 1) / 2;
    } else if (std::holds_alternative<FlattenSpec>(l)) {
      features = ch * h * w;
    } else if (const auto* fs = std::get_if<FcSpec>(&l)) {
      --fc_left;
      std::int64_t p = 0;
      for (std::size_t i = 0; i < features; ++i)
        for (std::size_t o = 0; o < fs->out_features; ++o) {
          ++p;
          ++c.madds;
        }
      p += static_cast<std::int64_t>(fs->out_features);
      (fc_left == 0 ? c.classifier_params : c.params) += p;
      features = fs->out_features;
    }
  }
  return c;
}

std::size_t factorial_product_digits(const std::vector<std::size_t>& n) {
  double log10v = 0.0;
  for (std::size_t k : n) log10v += std::lgamma(static_cast<double>(k) + 1.0) / std::log(10.0);
  return static_cast<std::size_t>(std::floor(log10v)) + 1;
}

std::vector<double> numeric_gradient(const std::function<double()>& f,
                                     std::vector<double>& x, double h) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + h;
    const double up = f();
    x[i] = saved - h;
    const double down = f();
    x[i] = saved;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double denom = std::sqrt(na) + std::sqrt(nb);
  return denom == 0.0 ? 0.0 : std::sqrt(diff) / denom;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace chansparse::oracle
