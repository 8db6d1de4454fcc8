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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <gtest/gtest.h>

#include "chansparse/tensor.hpp"
#include "checks.hpp"
#include "oracles.hpp"

namespace chansparse {
namespace {

using oracle::Gen;

Matrix<double> filled(std::size_t r, std::size_t c, double v) {
  return Matrix<double>::Constant(static_cast<Eigen::Index>(r),
                                  static_cast<Eigen::Index>(c), v);
}

TEST(Tensor4, SizeIsProductOfDims) {
  Gen g(11);
  for (int i = 0; i < 20; ++i) {
    const Shape4 s{g.size(0, 4), g.size(0, 4), g.size(0, 6), g.size(0, 6)};
    Tensor4<float> t(s);
    EXPECT_EQ(t.size(), s.n * s.c * s.h * s.w);
  }
}

TEST(Tensor4, RejectsMismatchedData) {
  EXPECT_THROW(Tensor4<float>(Shape4{1, 2, 2, 2}, std::vector<float>(7)), ShapeError);
}

TEST(Tensor4, RowMajorPlanesAreContiguous) {
  Tensor4<int> t(Shape4{2, 3, 2, 2});
  std::iota(t.data().begin(), t.data().end(), 0);
  EXPECT_EQ(t(1, 2, 1, 0), ((1 * 3 + 2) * 2 + 1) * 2 + 0);
  EXPECT_EQ(t.plane(1, 2).front(), 20);
}

TEST(PlaneConvolve, OneByOneKernelScales) {
  const Matrix<double> out =
      plane_convolve(filled(3, 3, 1.0), filled(1, 1, 2.0), 1, Padding::Valid);
  ASSERT_EQ(out.rows(), 3);
  ASSERT_EQ(out.cols(), 3);
  EXPECT_TRUE((out.array() == 2.0).all());
}

TEST(PlaneConvolve, ValidOutputDims) {
  const Matrix<double> out =
      plane_convolve(filled(4, 4, 1.0), filled(3, 3, 1.0), 1, Padding::Valid);
  EXPECT_EQ(out.rows(), 2);
  EXPECT_EQ(out.cols(), 2);
}

TEST(PlaneConvolve, RandomSameMatchesNaiveOracle) {
  Gen g(5);
  for (int trial = 0; trial < 10; ++trial) {
    Matrix<double> x(5, 5), k(3, 3);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = g.uniform(-1, 1);
    for (Eigen::Index i = 0; i < k.size(); ++i) k.data()[i] = g.uniform(-1, 1);
    const Matrix<double> y = plane_convolve(x, k, 1, Padding::Same);
    const auto ref = oracle::naive_conv(std::vector<double>(x.data(), x.data() + 25),
                                        Shape4{1, 1, 5, 5},
                                        std::vector<double>(k.data(), k.data() + 9), 1,
                                        3, 3, {}, 1, Padding::Same, nullptr);
    ASSERT_EQ(y.size(), 25);
    for (int i = 0; i < 25; ++i) EXPECT_NEAR(y.data()[i], ref[i], 1e-6);
  }
}

TEST(PlaneConvolve, KernelLargerThanPlaneNamesAxis) {
  try {
    plane_convolve(filled(2, 5, 1.0), filled(3, 3, 1.0), 1, Padding::Valid);
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    EXPECT_EQ(e.axis(), "height");
  }
  try {
    plane_convolve(filled(5, 5, 1.0), filled(3, 3, 1.0), 0, Padding::Same);
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    EXPECT_EQ(e.axis(), "stride");
  }
}

TEST(PlaneConvolve, IsLinear) {
  Gen g(17);
  for (int trial = 0; trial < 20; ++trial) {
    const auto h = static_cast<Eigen::Index>(g.size(3, 9));
    const auto w = static_cast<Eigen::Index>(g.size(3, 9));
    const auto kh = static_cast<Eigen::Index>(g.size(1, 3));
    const auto kw = static_cast<Eigen::Index>(g.size(1, 3));
    Matrix<float> x(h, w), y(h, w), k(kh, kw);
    for (auto* m : {&x, &y, &k})
      for (Eigen::Index i = 0; i < m->size(); ++i) m->data()[i] = static_cast<float>(g.uniform(-1, 1));
    const float a = static_cast<float>(g.uniform(-2, 2));
    const float b = static_cast<float>(g.uniform(-2, 2));
    const Padding p = g.coin() ? Padding::Same : Padding::Valid;
    const std::size_t s = g.size(1, 2);
    const Matrix<float> lhs = plane_convolve<float>(a * x + b * y, k, s, p);
    const Matrix<float> rhs =
        a * plane_convolve(x, k, s, p) + b * plane_convolve(y, k, s, p);
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-5f);
  }
}

TEST(ConvExtent, SameAndValidArithmetic) {
  Gen g(3);
  for (int i = 0; i < 50; ++i) {
    const std::size_t k = g.size(1, 5), s = g.size(1, 3), in = g.size(k, 20);
    for (Padding p : {Padding::Same, Padding::Valid}) {
      const AxisExtent e = conv_extent(in, k, s, p, "height");
      const oracle::Extent ref = oracle::extent(in, k, s, p);
      EXPECT_EQ(e.out, ref.out);
      EXPECT_EQ(e.pad_before, ref.pad);
    }
  }
}

TEST(Im2col, Col2imIsAdjoint) {
  Gen g(23);
  for (int trial = 0; trial < 10; ++trial) {
    const auto c = checks::random_conv_case(100 + trial);
    const ConvGeometry geo =
        make_conv_geometry(c.c_in, c.h, c.w, c.kh, c.kw, c.stride, c.padding);
    const auto x = oracle::random_vector<double>(c.c_in * c.h * c.w, g);
    Matrix<double> cols;
    im2col<double>(x, geo, cols);
    Matrix<double> r(cols.rows(), cols.cols());
    for (Eigen::Index i = 0; i < r.size(); ++i) r.data()[i] = g.uniform(-1, 1);
    std::vector<double> back(x.size(), 0.0);
    col2im<double>(r, geo, back);
    const double lhs = (cols.array() * r.array()).sum();
    const double rhs = std::inner_product(x.begin(), x.end(), back.begin(), 0.0);
    EXPECT_NEAR(lhs, rhs, 1e-10);
  }
}

TEST(MaxPool, TwoByTwoPicksMax) {
  Tensor4<float> x(Shape4{1, 1, 2, 2}, {1, 2, 3, 4});
  const auto r = maxpool2x2(x);
  ASSERT_EQ(r.out.size(), 1u);
  EXPECT_EQ(r.out.data()[0], 4.0f);
  EXPECT_EQ(r.argmax[0], 3u);  // row 1, column 1
}

TEST(MaxPool, ConstantPlaneTiesToFirst) {
  Tensor4<float> x(Shape4{1, 1, 4, 4}, 7.0f);
  const auto r = maxpool2x2(x);
  const std::vector<std::uint32_t> first{0, 2, 8, 10};
  EXPECT_EQ(r.argmax, first);
  for (float v : r.out.data()) EXPECT_EQ(v, 7.0f);
}

TEST(MaxPool, MatchesBruteForce) {
  Gen g(31);
  for (int trial = 0; trial < 20; ++trial) {
    const Shape4 s = trial == 0 ? Shape4{1, 1, 8, 8}
                                : Shape4{g.size(1, 3), g.size(1, 3), g.size(1, 9), g.size(1, 9)};
    const auto x = oracle::random_tensor<double>(s, g);
    const auto r = maxpool2x2(x);
    const auto ref = oracle::brute_maxpool(oracle::to_double<double>(x.data()), s);
    EXPECT_EQ(r.out.shape(), (Shape4{s.n, s.c, (s.h + 1) / 2, (s.w + 1) / 2}));
    EXPECT_EQ(oracle::to_double<double>(r.out.data()), ref.out);
    EXPECT_EQ(std::vector<std::size_t>(r.argmax.begin(), r.argmax.end()), ref.argmax);
  }
}

TEST(MaxPool, BackwardRoutesEachGradientOnce) {
  Gen g(37);
  for (int trial = 0; trial < 20; ++trial) {
    const Shape4 s{g.size(1, 3), g.size(1, 3), g.size(1, 9), g.size(1, 9)};
    const auto x = oracle::random_tensor<float>(s, g);
    const auto r = maxpool2x2(x);
    // Small integers keep the float sums exact.
    Tensor4<float> gy(r.out.shape());
    for (float& v : gy.data()) v = static_cast<float>(g.size(0, 8)) - 4.0f;
    const auto dx = maxpool2x2_backward(gy, std::span<const std::uint32_t>(r.argmax), s);
    const float in_sum = std::accumulate(dx.data().begin(), dx.data().end(), 0.0f);
    const float out_sum = std::accumulate(gy.data().begin(), gy.data().end(), 0.0f);
    EXPECT_EQ(in_sum, out_sum);
    std::size_t nonzero_positions = 0;
    for (std::size_t i = 0; i < dx.size(); ++i) {
      const bool selected =
          std::find(r.argmax.begin(), r.argmax.end(), i) != r.argmax.end();
      if (!selected) EXPECT_EQ(dx.data()[i], 0.0f);
      nonzero_positions += selected;
    }
    EXPECT_EQ(nonzero_positions, r.argmax.size());
  }
}

TEST(Relu, ClampsNegatives) {
  Tensor4<float> x(Shape4{1, 1, 1, 3}, {-1, 0, 2});
  const auto y = relu(x);
  EXPECT_EQ(std::vector<float>(y.data().begin(), y.data().end()),
            (std::vector<float>{0, 0, 2}));
}

TEST(SoftmaxXent, UniformLogitsGiveLogK) {
  const Matrix<double> logits = Matrix<double>::Constant(4, 10, 0.3);
  const std::vector<std::int32_t> labels{0, 3, 9, 5};
  const auto r = softmax_xent(logits, std::span<const std::int32_t>(labels));
  EXPECT_NEAR(r.loss, std::log(10.0), 1e-12);
  EXPECT_NEAR(r.loss, 2.302585, 1e-6);
}

TEST(SoftmaxXent, GradientIsSoftmaxMinusOneHotOverN) {
  Matrix<double> logits(2, 3);
  logits << 1, 2, 3, 0, 0, 0;
  const std::vector<std::int32_t> labels{2, 0};
  const auto r = softmax_xent(logits, std::span<const std::int32_t>(labels));
  const double z = std::exp(1.0) + std::exp(2.0) + std::exp(3.0);
  EXPECT_NEAR(r.dlogits(0, 2), (std::exp(3.0) / z - 1.0) / 2.0, 1e-12);
  EXPECT_NEAR(r.dlogits(1, 1), (1.0 / 3.0) / 2.0, 1e-12);
}

TEST(SoftmaxXent, RejectsOutOfRangeLabel) {
  const Matrix<float> logits = Matrix<float>::Zero(2, 3);
  const std::vector<std::int32_t> bad{0, 3};
  EXPECT_THROW(softmax_xent(logits, std::span<const std::int32_t>(bad)), std::out_of_range);
  const std::vector<std::int32_t> negative{-1, 0};
  EXPECT_THROW(softmax_xent(logits, std::span<const std::int32_t>(negative)), std::out_of_range);
}

TEST(SoftmaxXent, FiniteDifferenceGradient) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    EXPECT_LT(checks::gradcheck_softmax_xent(seed), 1e-5) << "seed " << seed;
  }
}

TEST(MatmulBias, ComputesAffineMap) {
  Matrix<double> x(1, 2), w(2, 2);
  x << 1, 2;
  w << 1, 0, 0, 1;
  const std::vector<double> b{0.5, -0.5};
  const Matrix<double> y = matmul_bias(x, w, std::span<const double>(b));
  EXPECT_DOUBLE_EQ(y(0, 0), 1.5);
  EXPECT_DOUBLE_EQ(y(0, 1), 1.5);
  const Matrix<double> narrow = Matrix<double>::Ones(1, 3);
  EXPECT_THROW(matmul_bias(narrow, w, std::span<const double>(b)), ShapeError);
}

class BatchNorm : public ::testing::Test {
 protected:
  std::vector<double> gamma_, beta_, mean_, var_;
  void reset(std::size_t c, double g, double b) {
    gamma_.assign(c, g);
    beta_.assign(c, b);
    mean_.assign(c, 0.0);
    var_.assign(c, 1.0);
  }
  Tensor4<double> run(const Tensor4<double>& x, Mode mode,
                      const BatchNormOptions& opt = {}) {
    return batchnorm2d_forward<double>(x, std::span<const double>(gamma_),
                               std::span<const double>(beta_), std::span<double>(mean_),
                               std::span<double>(var_), opt, mode, nullptr);
  }
};

TEST_F(BatchNorm, StandardizedInputPassesThrough) {
  // Two samples per channel at +-1: mean 0, biased variance 1.
  Tensor4<double> x(Shape4{2, 2, 1, 1}, {1, -1, -1, 1});
  reset(2, 1.0, 0.0);
  const auto y = run(x, Mode::Train);
  const double scale = 1.0 / std::sqrt(1.0 + 1e-5);
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_NEAR(y.data()[i], x.data()[i] * scale, 1e-12);
    EXPECT_NEAR(y.data()[i], x.data()[i], 1e-5);
  }
}

TEST_F(BatchNorm, ZeroGammaGivesBeta) {
  Gen g(41);
  const auto x = oracle::random_tensor<double>(Shape4{3, 2, 2, 2}, g);
  reset(2, 0.0, 0.0);
  beta_ = {0.25, -3.0};
  const auto y = run(x, Mode::Train);
  for (std::size_t n = 0; n < 3; ++n)
    for (std::size_t c = 0; c < 2; ++c)
      for (double v : y.plane(n, c)) EXPECT_EQ(v, beta_[c]);
}

TEST_F(BatchNorm, RejectsNonPositiveEps) {
  Tensor4<double> x(Shape4{2, 1, 1, 1}, {1, 2});
  reset(1, 1.0, 0.0);
  EXPECT_THROW(run(x, Mode::Train, BatchNormOptions{0.0, 0.1}), ConfigError);
  EXPECT_THROW(run(x, Mode::Train, BatchNormOptions{-1e-3, 0.1}), ConfigError);
}

TEST_F(BatchNorm, TrainModeNeedsTwoValues) {
  Tensor4<double> x(Shape4{1, 1, 1, 1}, {1});
  reset(1, 1.0, 0.0);
  EXPECT_THROW(run(x, Mode::Train), ShapeError);
  EXPECT_NO_THROW(run(x, Mode::Eval));
}

TEST_F(BatchNorm, TrainOutputIsStandardizedPerChannel) {
  Gen g(43);
  for (int trial = 0; trial < 20; ++trial) {
    const Shape4 s{g.size(2, 5), g.size(1, 4), g.size(1, 6), g.size(1, 6)};
    Tensor4<double> x(s);
    for (std::size_t n = 0; n < s.n; ++n)
      for (std::size_t c = 0; c < s.c; ++c)
        for (double& v : x.plane(n, c)) v = 5.0 * c + g.uniform(-3, 3);
    reset(s.c, 1.0, 0.0);
    const auto y = run(x, Mode::Train);
    const double count = static_cast<double>(s.n * s.plane());
    for (std::size_t c = 0; c < s.c; ++c) {
      double sum = 0.0, sq = 0.0;
      for (std::size_t n = 0; n < s.n; ++n)
        for (double v : y.plane(n, c)) sum += v;
      const double mean = sum / count;
      for (std::size_t n = 0; n < s.n; ++n)
        for (double v : y.plane(n, c)) sq += (v - mean) * (v - mean);
      EXPECT_LT(std::abs(mean), 1e-5);
      EXPECT_NEAR(sq / count, 1.0, 1e-3);
    }
  }
}

TEST_F(BatchNorm, RunningStatisticsFollowMomentum) {
  Tensor4<double> x(Shape4{4, 1, 1, 1}, {1, 2, 3, 4});
  reset(1, 1.0, 0.0);
  run(x, Mode::Train);
  // batch mean 2.5, unbiased variance 5/3
  EXPECT_NEAR(mean_[0], 0.9 * 0.0 + 0.1 * 2.5, 1e-12);
  EXPECT_NEAR(var_[0], 0.9 * 1.0 + 0.1 * (5.0 / 3.0), 1e-12);
  const auto y = run(x, Mode::Eval);
  EXPECT_NEAR(y.data()[0], (1.0 - mean_[0]) / std::sqrt(var_[0] + 1e-5), 1e-12);
}

TEST_F(BatchNorm, ChannelsAreIndependent) {
  Gen g(47);
  auto x = oracle::random_tensor<double>(Shape4{3, 3, 2, 2}, g);
  reset(3, 1.0, 0.0);
  const auto y1 = run(x, Mode::Train);
  for (std::size_t n = 0; n < 3; ++n)
    for (double& v : x.plane(n, 2)) v = 100.0 * v;
  reset(3, 1.0, 0.0);
  const auto y2 = run(x, Mode::Train);
  for (std::size_t n = 0; n < 3; ++n)
    for (std::size_t c = 0; c < 2; ++c)
      for (std::size_t i = 0; i < 4; ++i)
        EXPECT_EQ(y1.plane(n, c)[i], y2.plane(n, c)[i]);
}

// Finite-difference checks: 20 random instances per primitive.
TEST(GradientCheck, DenseConv) {
  for (std::uint64_t s = 0; s < 20; ++s)
    EXPECT_LT(checks::gradcheck_dense_conv(s), 1e-4) << describe(checks::random_conv_case(s));
}

TEST(GradientCheck, BatchNorm) {
  for (std::uint64_t s = 0; s < 20; ++s) EXPECT_LT(checks::gradcheck_batchnorm(s), 1e-4);
}

TEST(GradientCheck, MaxPool) {
  for (std::uint64_t s = 0; s < 20; ++s) EXPECT_LT(checks::gradcheck_maxpool(s), 1e-4);
}

TEST(GradientCheck, Relu) {
  for (std::uint64_t s = 0; s < 20; ++s) EXPECT_LT(checks::gradcheck_relu(s), 1e-4);
}

TEST(GradientCheck, MatmulBias) {
  for (std::uint64_t s = 0; s < 20; ++s) EXPECT_LT(checks::gradcheck_fc(s), 1e-4);
}

TEST(Primitives, FiniteOutputsForFiniteInputs) {
  Gen g(53);
  for (int trial = 0; trial < 20; ++trial) {
    const Shape4 s{g.size(2, 3), g.size(1, 3), g.size(2, 6), g.size(2, 6)};
    const auto x = oracle::random_tensor<float>(s, g, -1e3, 1e3);
    std::vector<float> gamma(s.c, 1.0f), beta(s.c, 0.0f), m(s.c, 0.0f), v(s.c, 1.0f);
    const auto y = batchnorm2d_forward<float>(x, std::span<const float>(gamma),
                                       std::span<const float>(beta), std::span<float>(m),
                                       std::span<float>(v), BatchNormOptions{}, Mode::Train, nullptr);
    for (float f : y.data()) ASSERT_TRUE(std::isfinite(f));
    for (float f : maxpool2x2(x).out.data()) ASSERT_TRUE(std::isfinite(f));
    Matrix<float> logits(2, 3);
    logits << 1e4f, -1e4f, 0.0f, 80.0f, 90.0f, -100.0f;
    const std::vector<std::int32_t> labels{1, 2};
    const auto r = softmax_xent(logits, std::span<const std::int32_t>(labels));
    ASSERT_TRUE(std::isfinite(r.loss));
    for (Eigen::Index i = 0; i < r.dlogits.size(); ++i) ASSERT_TRUE(std::isfinite(r.dlogits.data()[i]));
  }
}

}  // namespace
}  // namespace chansparse
