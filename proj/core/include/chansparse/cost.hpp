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

#include <cstdint>
#include <string>
#include <vector>

#include "chansparse/connectivity.hpp"
#include "chansparse/network.hpp"

namespace chansparse {

struct LayerCost {
  std::string name;
  std::string kind;       // "conv" or "fc"
  std::int64_t weights = 0;
  std::int64_t params = 0;  // weights + bias (+ batch-norm gamma/beta)
  std::int64_t madds = 0;
  bool classifier = false;
};

/// Parameter and multiply-add counts for one forward pass of one sample.
/// The final classifier is listed per layer but left out of total_params.
struct CostReport {
  std::vector<LayerCost> layers;
  std::int64_t total_params = 0;
  std::int64_t total_madds = 0;
  std::int64_t classifier_params = 0;
};

CostReport cost_report(const ArchSpec& arch,
                       const std::vector<ConnectivityMask>& masks);

template <typename T>
CostReport cost_report(const Network<T>& net) {
  return cost_report(net.arch(), net.masks());
}

std::string cost_report_to_json(const CostReport& report);
/// Aligned plain-text table.
std::string format_cost_table(const CostReport& report);

}  // namespace chansparse
