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

// Momentum SGD, the incremental densification schedule and the training
// loop that produces RunRecords.

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "chansparse/dataset.hpp"
#include "chansparse/network.hpp"
#include "chansparse/run_record.hpp"

namespace chansparse {

struct TrainConfig {
  std::size_t batch_size = 64;
  double lr = 0.05;
  double momentum = 0.9;
  std::size_t epochs = 1;
  std::uint64_t seed = 1;
  /// Steps between eval points; 0 means once per epoch.
  std::size_t eval_every = 0;
  /// Step decay: lr *= lr_decay every lr_decay_epochs epochs (0 disables).
  double lr_decay = 0.1;
  std::size_t lr_decay_epochs = 0;
  /// Test items used at intermediate eval points (0 = all). The final eval
  /// point always uses the whole test set.
  std::size_t eval_samples = 0;
  int precision = 32;
};

/// Throws ConfigError unless batch_size >= 1, lr > 0, momentum in [0, 1).
void validate(const TrainConfig& config);

enum class Growth { Double, None };

struct DensifySchedule {
  double initial_density = 1.0;
  std::size_t period = 1;
  Growth growth = Growth::Double;
  NewConnectionInit new_connections = NewConnectionInit::Fresh;
};

void validate(const DensifySchedule& schedule);

/// min(1, d0 * 2^floor(step / T)) for Growth::Double, d0 otherwise.
double target_density(const DensifySchedule& schedule, std::size_t step);

/// Grows every conv mask whose density is below the schedule target to
/// ceil(target * n_in * n_out) connections. Returns true if anything changed.
template <typename T>
bool apply_densification(Network<T>& net, const DensifySchedule& schedule,
                         std::size_t step, std::mt19937_64& rng);

/// Active connections over possible connections, across all conv layers.
template <typename T>
double connection_density(const Network<T>& net);

/// One momentum-SGD update (v = momentum * v + g; w -= lr * v) on every
/// parameter. Returns the pre-update mean batch loss. Throws NumericError
/// with per-layer activation norms when the loss is not finite.
template <typename T>
T sgd_step(Network<T>& net, const Tensor4<T>& batch,
           std::span<const std::int32_t> labels, double lr, double momentum);

/// Precision@1 in eval mode.
template <typename T>
double evaluate(Network<T>& net, const Dataset& data,
                std::size_t batch_size = 256);

double learning_rate_at(const TrainConfig& config, std::size_t epoch);

struct TrainHooks {
  std::function<void(const EvalPoint&)> on_eval;
};

/// Trains for config.epochs over `train`, evaluating on `test`. When
/// `schedule` is non-null densification runs before every step.
template <typename T>
RunRecord train_run(Network<T>& net, const Dataset& train, const Dataset& test,
                    const TrainConfig& config,
                    const DensifySchedule* schedule = nullptr,
                    const TrainHooks& hooks = {});

}  // namespace chansparse
