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

#include "chansparse/cost.hpp"

#include <cstdio>
#include <sstream>

#include <json.hpp>

namespace chansparse {

CostReport cost_report(const ArchSpec& arch,
                       const std::vector<ConnectivityMask>& masks) {
  const auto convs = conv_interfaces(arch);
  if (masks.size() != convs.size()) {
    throw ShapeError("masks", "mask count does not match conv layer count");
  }
  CostReport r;
  std::size_t conv_i = 0, fc_i = 0, features = 0;
  std::size_t c = arch.in_channels, h = arch.in_height, w = arch.in_width;
  for (std::size_t li = 0; li < arch.layers.size(); ++li) {
    const LayerSpec& spec = arch.layers[li];
    if (const auto* conv = std::get_if<ConvSpec>(&spec)) {
      const ConvInterface& ci = convs[conv_i];
      const ConnectivityMask& m = masks[conv_i];
      if (m.n_in() != ci.n_in || m.n_out() != ci.n_out) {
        throw ShapeError("channels", "mask " + std::to_string(conv_i) +
                                         " does not match its conv layer");
      }
      LayerCost lc;
      lc.name = "conv" + std::to_string(conv_i);
      lc.kind = "conv";
      const auto taps = static_cast<std::int64_t>(ci.kernel_h * ci.kernel_w);
      const auto active = static_cast<std::int64_t>(m.active_count());
      lc.weights = taps * active;
      lc.params = lc.weights + static_cast<std::int64_t>(ci.n_out) *
                                   (conv->batch_norm ? 3 : 1);
      lc.madds = lc.weights * static_cast<std::int64_t>(ci.out_h * ci.out_w);
      r.layers.push_back(lc);
      c = ci.n_out;
      h = ci.out_h;
      w = ci.out_w;
      ++conv_i;
    } else if (std::holds_alternative<MaxPoolSpec>(spec)) {
      h = (h + 1) / 2;
      w = (w + 1) / 2;
    } else if (std::holds_alternative<FlattenSpec>(spec)) {
      features = c * h * w;
    } else if (const auto* fc = std::get_if<FcSpec>(&spec)) {
      LayerCost lc;
      lc.name = "fc" + std::to_string(fc_i++);
      lc.kind = "fc";
      lc.weights = static_cast<std::int64_t>(features * fc->out_features);
      lc.params = lc.weights + static_cast<std::int64_t>(fc->out_features);
      lc.madds = lc.weights;
      lc.classifier = std::holds_alternative<SoftmaxXentSpec>(arch.layers[li + 1]);
      r.layers.push_back(lc);
      features = fc->out_features;
    }
  }
  for (const LayerCost& lc : r.layers) {
    r.total_madds += lc.madds;
    if (lc.classifier) {
      r.classifier_params += lc.params;
    } else {
      r.total_params += lc.params;
    }
  }
  return r;
}

std::string cost_report_to_json(const CostReport& report) {
  nlohmann::json layers = nlohmann::json::array();
  for (const LayerCost& lc : report.layers) {
    layers.push_back({{"name", lc.name},
                      {"kind", lc.kind},
                      {"weights", lc.weights},
                      {"params", lc.params},
                      {"madds", lc.madds},
                      {"classifier", lc.classifier}});
  }
  return nlohmann::json{{"layers", layers},
                        {"total_params", report.total_params},
                        {"total_madds", report.total_madds},
                        {"classifier_params", report.classifier_params}}
      .dump(2);
}

std::string format_cost_table(const CostReport& report) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof line, "%-8s %-5s %14s %14s %16s\n", "layer", "kind",
                "weights", "params", "madds");
  os << line;
  for (const LayerCost& lc : report.layers) {
    std::snprintf(line, sizeof line, "%-8s %-5s %14lld %14lld %16lld%s\n",
                  lc.name.c_str(), lc.kind.c_str(),
                  static_cast<long long>(lc.weights),
                  static_cast<long long>(lc.params),
                  static_cast<long long>(lc.madds),
                  lc.classifier ? "  (classifier)" : "");
    os << line;
  }
  std::snprintf(line, sizeof line, "%-14s %14s %14lld %16lld\n", "total", "",
                static_cast<long long>(report.total_params),
                static_cast<long long>(report.total_madds));
  os << line;
  std::snprintf(line, sizeof line, "%-14s %14s %14lld\n", "classifier", "",
                static_cast<long long>(report.classifier_params));
  os << line;
  return os.str();
}

}  // namespace chansparse
