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

// Dense vs channel-sparse convolution and a full MNIST training step.

#include <random>

#include <benchmark/benchmark.h>

#include "chansparse/conv.hpp"
#include "chansparse/network.hpp"
#include "chansparse/training.hpp"

namespace chansparse {
namespace {

constexpr std::size_t kBatch = 64, kIn = 32, kOut = 64, kHw = 14, kK = 5;

Tensor4<float> random_input(std::size_t n, std::size_t c, std::size_t hw, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(-1.f, 1.f);
  Tensor4<float> x(Shape4{n, c, hw, hw});
  for (float& v : x.data()) v = u(rng);
  return x;
}

std::vector<float> random_weights(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> g(0.f, 0.05f);
  std::vector<float> w(n);
  for (float& v : w) v = g(rng);
  return w;
}

void BM_DenseConvForward(benchmark::State& state) {
  const Tensor4<float> x = random_input(kBatch, kIn, kHw, 1);
  KernelStack<float> w(kOut, kIn, kK, kK);
  const auto values = random_weights(w.size(), 2);
  std::copy(values.begin(), values.end(), w.data().begin());
  const std::vector<float> bias(kOut, 0.f);
  for (auto _ : state) {
    benchmark::DoNotOptimize(dense_conv_forward<float>(x, w, bias, 1, Padding::Same));
  }
}
BENCHMARK(BM_DenseConvForward)->Unit(benchmark::kMillisecond);

/// Argument: connection fraction in percent.
void BM_SparseConvForward(benchmark::State& state) {
  const double alpha = static_cast<double>(state.range(0)) / 100.0;
  const Tensor4<float> x = random_input(kBatch, kIn, kHw, 1);
  const SlotIndex slots = SlotIndex::from_mask(sparse_random_mask(kIn, kOut, alpha, 3));
  const auto w = random_weights(slots.slots() * kK * kK, 2);
  const std::vector<float> bias(kOut, 0.f);
  const ConvWindow window{kK, kK, 1, Padding::Same};
  for (auto _ : state) {
    benchmark::DoNotOptimize(sparse_conv_forward<float>(x, w, slots, bias, window));
  }
  state.counters["slots"] = static_cast<double>(slots.slots());
}
BENCHMARK(BM_SparseConvForward)->Arg(100)->Arg(30)->Arg(10)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_SparseConvBackward(benchmark::State& state) {
  const double alpha = static_cast<double>(state.range(0)) / 100.0;
  const Tensor4<float> x = random_input(kBatch, kIn, kHw, 1);
  const Tensor4<float> g = random_input(kBatch, kOut, kHw, 4);
  const SlotIndex slots = SlotIndex::from_mask(sparse_random_mask(kIn, kOut, alpha, 3));
  const auto w = random_weights(slots.slots() * kK * kK, 2);
  const ConvWindow window{kK, kK, 1, Padding::Same};
  for (auto _ : state) {
    benchmark::DoNotOptimize(sparse_conv_backward<float>(x, w, slots, g, window));
  }
}
BENCHMARK(BM_SparseConvBackward)->Arg(100)->Arg(10)->Unit(benchmark::kMillisecond);

/// One SGD step of the MNIST-shaped net; argument is the connection percent.
void BM_MnistTrainStep(benchmark::State& state) {
  ArchSpec a;
  a.in_channels = 1;
  a.in_height = 28;
  a.in_width = 28;
  a.classes = 10;
  for (auto [c, k] : {std::pair{32, 5}, {64, 5}, {128, 3}}) {
    a.layers.push_back(ConvSpec{static_cast<std::size_t>(c), static_cast<std::size_t>(k),
                                static_cast<std::size_t>(k), 1, Padding::Same, true});
    a.layers.push_back(MaxPoolSpec{});
  }
  a.layers.push_back(FlattenSpec{});
  a.layers.push_back(FcSpec{128});
  a.layers.push_back(FcSpec{10});
  a.layers.push_back(SoftmaxXentSpec{});

  const auto t = sparsify_arch(a, static_cast<double>(state.range(0)) / 100.0, 5);
  Network<float> net(t.arch, t.masks, 5);
  const Tensor4<float> x = random_input(kBatch, 1, 28, 6);
  std::vector<std::int32_t> labels(kBatch);
  for (std::size_t i = 0; i < kBatch; ++i) labels[i] = static_cast<std::int32_t>(i % 10);
  for (auto _ : state) benchmark::DoNotOptimize(sgd_step(net, x, labels, 0.01, 0.9));
}
BENCHMARK(BM_MnistTrainStep)->Arg(100)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace chansparse

BENCHMARK_MAIN();
