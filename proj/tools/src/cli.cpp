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

#include <memory>
#include <ostream>

#include <CLI11.hpp>

#include "chansparse/errors.hpp"
#include "chansparse_cli/commands.hpp"

namespace chansparse::cli {

namespace {

struct CommonFlags {
  std::string config;
  std::string out;
  std::string seeds;
  std::size_t threads = 0;
  int precision = 0;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "Experiment config (JSON)")
      ->required();
  cmd->add_option("--out", f.out, "Output directory (overrides config)");
  cmd->add_option("--seeds", f.seeds, "Comma-separated seeds (overrides config)");
  cmd->add_option("--threads", f.threads, "Worker threads (overrides config)")
      ->check(CLI::Range(std::size_t{1}, std::size_t{4096}));
  cmd->add_option("--precision", f.precision, "Floating-point width")
      ->check(CLI::IsMember({32, 64}));
}

ExperimentConfig resolve_config(const CommonFlags& f) {
  ExperimentConfig c = load_experiment_config(f.config);
  if (!f.out.empty()) c.out = f.out;
  if (!f.seeds.empty()) c.seeds = parse_seed_list(f.seeds);
  if (f.threads > 0) c.threads = f.threads;
  if (f.precision > 0) c.train.precision = f.precision;
  return c;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Channel-sparse convolutional networks: training, sweeps, "
               "equivalence checks and cost reports"};
  app.require_subcommand(1);

  CommonFlags train_flags, sweep_flags, incr_flags;
  CLI::App* train = app.add_subcommand("train", "Train one network per seed");
  add_common(train, train_flags);
  CLI::App* sweep =
      app.add_subcommand("sweep", "Budget-matched sparse vs depth-multiplier sweep");
  add_common(sweep, sweep_flags);
  std::vector<double> budgets;
  sweep->add_option("--budgets", budgets, "Budget fractions (overrides config)")
      ->delimiter(',');
  CLI::App* incremental =
      app.add_subcommand("incremental", "Train with incremental densification");
  add_common(incremental, incr_flags);

  VerifyOptions verify_opts;
  CLI::App* verify =
      app.add_subcommand("verify", "Check a random channel-permuted twin");
  verify->add_option("--checkpoint", verify_opts.checkpoint, "Checkpoint file");
  verify->add_option("--arch", verify_opts.arch,
                     "Arch JSON for a freshly initialised network");
  verify->add_option("--seed", verify_opts.seed, "Init, permutation and input seed");
  verify->add_option("--trials", verify_opts.trials, "Random input batches");
  verify->add_option("--tol", verify_opts.tol, "Max absolute logit difference");
  verify->add_option("--precision", verify_opts.precision, "Floating-point width")
      ->check(CLI::IsMember({32, 64}));

  CostOptions cost_opts;
  std::string kind = "sparse_random", sampler = "fixed_fan_in";
  CLI::App* cost = app.add_subcommand("cost", "Parameter and multiply-add table");
  cost->add_option("--arch", cost_opts.arch, "Arch JSON")->required();
  cost->add_option("--kind", kind, "depth_multiplier | sparse_random | hybrid");
  cost->add_option("--alpha", cost_opts.transform.alpha,
                   "Filter fraction (depth) or connection fraction (sparse)");
  cost->add_option("--depth", cost_opts.transform.depth, "Hybrid filter fraction");
  cost->add_option("--seed", cost_opts.transform.seed, "Mask seed");
  cost->add_option("--sampler", sampler, "fixed_fan_in | bernoulli");
  cost->add_flag("--json", cost_opts.json, "Emit JSON instead of a table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigFailure;
  }

  try {
    if (train->parsed()) {
      cmd_train(resolve_config(train_flags), err);
    } else if (sweep->parsed()) {
      ExperimentConfig c = resolve_config(sweep_flags);
      if (!budgets.empty()) c.sweep.budgets = budgets;
      for (double b : c.sweep.budgets) validate_alpha(b, "--budgets");
      cmd_sweep(c, err);
    } else if (incremental->parsed()) {
      cmd_incremental(resolve_config(incr_flags), err);
    } else if (verify->parsed()) {
      return cmd_verify(verify_opts, out) ? kOk : kRuntimeFailure;
    } else if (cost->parsed()) {
      cost_opts.transform.kind = transform_kind_from_string(kind);
      if (sampler == "bernoulli") {
        cost_opts.transform.sampler = Sampler::Bernoulli;
      } else if (sampler != "fixed_fan_in") {
        throw ConfigError("--sampler: expected fixed_fan_in or bernoulli");
      }
      cmd_cost(cost_opts, out);
    }
  } catch (const FormatError& e) {
    err << "error: corrupt artifact: " << e.what() << '\n';
    return kCorruptArtifact;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeFailure;
  }
  return kOk;
}

}  // namespace chansparse::cli
