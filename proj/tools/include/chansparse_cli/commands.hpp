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

#include <iosfwd>
#include <string>
#include <vector>

#include "chansparse/run_record.hpp"
#include "chansparse_cli/experiment.hpp"

namespace chansparse::cli {

enum ExitCode : int {
  kOk = 0,
  kRuntimeFailure = 1,
  kConfigFailure = 2,
  kCorruptArtifact = 3,
};

/// One trained (or skipped) configuration.
struct RunSummary {
  std::string tag;
  std::string kind;
  std::string budget;  // empty outside sweeps
  double alpha = 1.0;
  double fraction = 1.0;
  std::int64_t params = 0;
  std::int64_t madds = 0;
  std::uint64_t seed = 0;
  double accuracy = 0.0;
  std::string status = "ok";
  RunRecord record;
};

/// results.csv layout shared by train, incremental and sweep.
CsvTable summary_table(const std::vector<RunSummary>& runs);

/// Writes results.csv, runs/*.jsonl, report.json under config.out.
/// Checkpoints are written by the commands themselves.
void write_outputs(const ExperimentConfig& config, const std::string& command,
                   const std::vector<RunSummary>& runs);

std::vector<RunSummary> cmd_train(const ExperimentConfig& config,
                                  std::ostream& log);
std::vector<RunSummary> cmd_incremental(const ExperimentConfig& config,
                                        std::ostream& log);
std::vector<RunSummary> cmd_sweep(const ExperimentConfig& config,
                                  std::ostream& log);

struct VerifyOptions {
  std::string checkpoint;
  std::string arch;  // used when no checkpoint is given
  std::uint64_t seed = 1;
  std::size_t trials = 5;
  double tol = 1e-5;
  int precision = 32;
};

/// Prints the JSON report; returns true when the permuted twin matches.
bool cmd_verify(const VerifyOptions& options, std::ostream& out);

struct CostOptions {
  std::string arch;
  TransformSpec transform;
  bool json = false;
};

void cmd_cost(const CostOptions& options, std::ostream& out);

/// Parses argv, runs the subcommand and maps exceptions to exit codes.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace chansparse::cli
