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

#include "chansparse/training.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

#include "chansparse/connectivity.hpp"
#include "chansparse/cost.hpp"

namespace chansparse {

void validate(const TrainConfig& c) {
  if (c.batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
  if (!(c.lr > 0.0)) throw ConfigError("train.lr must be > 0");
  if (!(c.momentum >= 0.0 && c.momentum < 1.0)) {
    throw ConfigError("train.momentum must lie in [0, 1)");
  }
  if (c.epochs < 1) throw ConfigError("train.epochs must be >= 1");
  if (c.precision != 32 && c.precision != 64) {
    throw ConfigError("precision must be 32 or 64");
  }
  if (!(c.lr_decay > 0.0)) throw ConfigError("train.lr_decay must be > 0");
}

void validate(const DensifySchedule& s) {
  validate_alpha(s.initial_density, "densify.initial_density");
  if (s.period < 1) throw ConfigError("densify.period must be >= 1");
}

double target_density(const DensifySchedule& schedule, std::size_t step) {
  if (schedule.growth == Growth::None) return schedule.initial_density;
  const std::size_t doublings = step / schedule.period;
  if (doublings >= 64) return 1.0;
  return std::min(1.0, schedule.initial_density *
                           std::ldexp(1.0, static_cast<int>(doublings)));
}

template <typename T>
bool apply_densification(Network<T>& net, const DensifySchedule& schedule,
                         std::size_t step, std::mt19937_64& rng) {
  const double target = target_density(schedule, step);
  bool changed = false;
  for (ConvLayer<T>* conv : net.conv_layers()) {
    const ConnectivityMask& m = conv->mask();
    const std::size_t possible = m.n_in() * m.n_out();
    const std::size_t active = m.active_count();
    const auto wanted = std::min<std::size_t>(
        possible, static_cast<std::size_t>(
                      std::ceil(target * static_cast<double>(possible) - 1e-9)));
    if (wanted > active) {
      conv->grow(densify(m, wanted - active, rng), schedule.new_connections, rng);
      changed = true;
    }
  }
  return changed;
}

template <typename T>
double connection_density(const Network<T>& net) {
  std::size_t active = 0, possible = 0;
  for (const ConnectivityMask& m : net.masks()) {
    active += m.active_count();
    possible += m.n_in() * m.n_out();
  }
  return possible == 0 ? 1.0
                       : static_cast<double>(active) / static_cast<double>(possible);
}

template <typename T>
T sgd_step(Network<T>& net, const Tensor4<T>& batch,
           std::span<const std::int32_t> labels, double lr, double momentum) {
  net.zero_grad();
  const Matrix<T> logits = net.forward(batch, Mode::Train);
  const XentResult<T> xent = softmax_xent(logits, labels);
  if (!std::isfinite(static_cast<double>(xent.loss))) {
    std::ostringstream msg;
    msg << "non-finite training loss; layer activation norms:";
    const auto& norms = net.activation_norms();
    for (std::size_t i = 0; i < norms.size(); ++i) {
      msg << ' ' << net.layer(i).kind() << '=' << norms[i];
    }
    throw NumericError(msg.str());
  }
  net.backward(xent.dlogits);
  const T mu = static_cast<T>(momentum);
  const T rate = static_cast<T>(lr);
  for (Param<T>* p : net.params()) {
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      p->velocity[i] = mu * p->velocity[i] + p->grad[i];
      p->value[i] -= rate * p->velocity[i];
    }
  }
  return xent.loss;
}

template <typename T>
double evaluate(Network<T>& net, const Dataset& data, std::size_t batch_size) {
  if (data.size() == 0) return 0.0;
  std::size_t correct = 0;
  std::vector<std::size_t> idx;
  for (std::size_t first = 0; first < data.size(); first += batch_size) {
    const std::size_t count = std::min(batch_size, data.size() - first);
    idx.resize(count);
    std::iota(idx.begin(), idx.end(), first);
    const auto pred = net.predict(data.batch<T>(idx));
    for (std::size_t k = 0; k < count; ++k) {
      if (pred[k] == data.labels[first + k]) ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

double learning_rate_at(const TrainConfig& config, std::size_t epoch) {
  if (config.lr_decay_epochs == 0) return config.lr;
  return config.lr *
         std::pow(config.lr_decay,
                  static_cast<double>(epoch / config.lr_decay_epochs));
}

template <typename T>
RunRecord train_run(Network<T>& net, const Dataset& train, const Dataset& test,
                    const TrainConfig& config, const DensifySchedule* schedule,
                    const TrainHooks& hooks) {
  validate(config);
  if (schedule != nullptr) validate(*schedule);
  if (train.size() == 0) throw ConfigError("training set is empty");
  const auto start = std::chrono::steady_clock::now();

  const std::size_t steps_per_epoch =
      (train.size() + config.batch_size - 1) / config.batch_size;
  const std::size_t total_steps = steps_per_epoch * config.epochs;
  const std::size_t eval_every =
      config.eval_every == 0 ? steps_per_epoch : config.eval_every;
  const Dataset eval_subset =
      config.eval_samples == 0 ? test : test.slice(0, config.eval_samples);

  std::mt19937_64 densify_rng(mix_seed(config.seed, 0xd5));
  RunRecord record;
  double loss_sum = 0.0;
  std::size_t loss_count = 0;
  std::vector<std::size_t> order(train.size());
  std::vector<std::size_t> idx;
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 shuffle_rng(mix_seed(config.seed, 0x5eed0000 + epoch));
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    const double lr = learning_rate_at(config, epoch);
    for (std::size_t first = 0; first < train.size(); first += config.batch_size) {
      if (schedule != nullptr) {
        apply_densification(net, *schedule, step, densify_rng);
      }
      const std::size_t count = std::min(config.batch_size, train.size() - first);
      idx.assign(order.begin() + static_cast<std::ptrdiff_t>(first),
                 order.begin() + static_cast<std::ptrdiff_t>(first + count));
      const T loss = sgd_step(net, train.batch<T>(idx), train.batch_labels(idx),
                              lr, config.momentum);
      loss_sum += static_cast<double>(loss);
      ++loss_count;
      ++step;

      const bool last = step == total_steps;
      if (last || step % eval_every == 0) {
        const CostReport cost = cost_report(net);
        EvalPoint p;
        p.step = step;
        p.realized_density = connection_density(net);
        p.density = schedule != nullptr ? target_density(*schedule, step - 1)
                                        : p.realized_density;
        p.params = cost.total_params;
        p.madds = cost.total_madds;
        p.train_loss = loss_sum / static_cast<double>(loss_count);
        p.test_accuracy = evaluate(net, last ? test : eval_subset);
        loss_sum = 0.0;
        loss_count = 0;
        record.points.push_back(p);
        if (hooks.on_eval) hooks.on_eval(p);
      }
    }
  }
  record.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return record;
}

#define CHANSPARSE_INSTANTIATE_TRAINING(T)                                    \
  template bool apply_densification(Network<T>&, const DensifySchedule&,      \
                                    std::size_t, std::mt19937_64&);           \
  template double connection_density(const Network<T>&);                     \
  template T sgd_step(Network<T>&, const Tensor4<T>&,                         \
                      std::span<const std::int32_t>, double, double);         \
  template double evaluate(Network<T>&, const Dataset&, std::size_t);         \
  template RunRecord train_run(Network<T>&, const Dataset&, const Dataset&,   \
                               const TrainConfig&, const DensifySchedule*,    \
                               const TrainHooks&);

CHANSPARSE_INSTANTIATE_TRAINING(float)
CHANSPARSE_INSTANTIATE_TRAINING(double)

#undef CHANSPARSE_INSTANTIATE_TRAINING

}  // namespace chansparse
