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

// Experiment configuration file (JSON, schema_version 1). Relative paths
// inside the file resolve against the file's directory.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "chansparse/connectivity.hpp"
#include "chansparse/dataset.hpp"
#include "chansparse/training.hpp"

namespace chansparse::cli {

inline constexpr int kSchemaVersion = 1;

struct DatasetConfig {
  std::string kind = "synth";  // "mnist" or "synth"
  std::string dir;
  SynthSpec synth;
  std::size_t synth_test_count = 256;
  std::uint64_t synth_seed = 7;
  /// Leading items kept from each split (0 keeps all).
  std::size_t train_samples = 0;
  std::size_t test_samples = 0;
};

struct SweepConfig {
  std::vector<double> budgets{1.0, 0.3, 0.1, 0.03};
  std::vector<TransformKind> kinds{TransformKind::SparseRandom,
                                   TransformKind::DepthMultiplier};
};

struct ExperimentConfig {
  std::string arch_source;  // path as written, or "<inline>"
  ArchSpec arch;
  TransformSpec transform;
  TrainConfig train;
  std::optional<DensifySchedule> densify;
  DatasetConfig dataset;
  SweepConfig sweep;
  std::string out = "out";
  /// Five rounds per configuration unless the file says otherwise.
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::size_t threads = 1;
};

/// Throws ConfigError naming the offending field.
ExperimentConfig parse_experiment_config(const std::string& text,
                                         const std::string& base_dir);
ExperimentConfig load_experiment_config(const std::string& path);

/// Canonical JSON snapshot (inline arch, every field explicit).
std::string experiment_config_to_json(const ExperimentConfig& config);

/// Comma-separated unsigned integers, e.g. "1,2,3".
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

struct LoadedData {
  Dataset train;
  Dataset test;
};

/// Throws ConfigError naming the path when MNIST files are missing.
LoadedData load_data(const DatasetConfig& config);

}  // namespace chansparse::cli
