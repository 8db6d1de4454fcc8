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

#include "chansparse_cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <mutex>
#include <ostream>
#include <thread>

#include <fmt/format.h>
#include <fmt/ostream.h>
#include <json.hpp>

#include "chansparse/checkpoint.hpp"
#include "chansparse/cost.hpp"
#include "chansparse/equivalence.hpp"
#include "chansparse/errors.hpp"

namespace chansparse::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

// Runs f(0..n-1) on `threads` workers; rethrows the first failure after all
// workers have stopped.
template <typename F>
void parallel_for(std::size_t n, std::size_t threads, F f) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        f(i);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < std::min(threads, n); ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

class Logger {
 public:
  explicit Logger(std::ostream& os) : os_(os) {}
  template <typename... Args>
  void line(fmt::format_string<Args...> f, Args&&... args) {
    const std::string s = fmt::format(f, std::forward<Args>(args)...);
    std::lock_guard lock(mu_);
    os_ << s << '\n' << std::flush;
  }

 private:
  std::ostream& os_;
  std::mutex mu_;
};

void check_data_matches(const ArchSpec& arch, const Dataset& d) {
  if (arch.in_channels != d.channels || arch.in_height != d.height ||
      arch.in_width != d.width) {
    throw ConfigError(fmt::format(
        "arch input {}x{}x{} does not match dataset images {}x{}x{}",
        arch.in_channels, arch.in_height, arch.in_width, d.channels, d.height,
        d.width));
  }
  if (arch.classes != d.classes) {
    throw ConfigError(fmt::format("arch has {} classes, dataset has {}",
                                  arch.classes, d.classes));
  }
}

struct RunJob {
  std::string tag;
  std::string kind;
  std::string budget;
  TransformSpec spec;
  double fraction = 1.0;
  std::uint64_t seed = 0;
  const DensifySchedule* schedule = nullptr;
  std::string skip_reason;  // non-empty: emit a warning row instead
};

template <typename T>
RunSummary execute(const ExperimentConfig& config, const LoadedData& data,
                   const RunJob& job, std::int64_t dense_weights,
                   Logger& log) {
  RunSummary s;
  s.tag = job.tag;
  s.kind = job.kind;
  s.budget = job.budget;
  s.alpha = job.spec.alpha;
  s.seed = job.seed;
  if (!job.skip_reason.empty()) {
    s.status = "skipped";
    s.fraction = job.fraction;
    log.line("warning: {}: {}", job.tag, job.skip_reason);
    return s;
  }
  TransformSpec spec = job.spec;
  spec.seed = job.seed;
  const TransformedArch t = apply_transform(config.arch, spec);
  Network<T> net(t.arch, t.masks, job.seed);
  TrainConfig train = config.train;
  train.seed = job.seed;
  TrainHooks hooks;
  hooks.on_eval = [&](const EvalPoint& p) {
    log.line("{} step {} density {:.4f} loss {:.4f} acc {:.4f}", job.tag, p.step,
             p.realized_density, p.train_loss, p.test_accuracy);
  };
  s.record = train_run(net, data.train, data.test, train, job.schedule, hooks);

  const CostReport cost = cost_report(net);
  s.params = cost.total_params;
  s.madds = cost.total_madds;
  s.fraction = static_cast<double>(conv_weight_count(net.arch(), net.masks())) /
               static_cast<double>(dense_weights);
  s.accuracy = s.record.points.back().test_accuracy;

  ordered_json extra;
  extra["tag"] = job.tag;
  extra["kind"] = job.kind;
  extra["seed"] = job.seed;
  save_checkpoint(
      (fs::path(config.out) / "checkpoints" / (job.tag + ".ckpt")).string(), net,
      extra.dump());
  return s;
}

std::vector<RunSummary> run_jobs(const ExperimentConfig& config,
                                 const std::vector<RunJob>& jobs,
                                 std::ostream& os) {
  Logger log(os);
  const LoadedData data = load_data(config.dataset);
  check_data_matches(config.arch, data.train);
  fs::create_directories(fs::path(config.out) / "checkpoints");
  const std::int64_t dense_weights =
      conv_weight_count(config.arch, full_masks(config.arch));
  std::vector<RunSummary> out(jobs.size());
  parallel_for(jobs.size(), config.threads, [&](std::size_t i) {
    out[i] = config.train.precision == 64
                 ? execute<double>(config, data, jobs[i], dense_weights, log)
                 : execute<float>(config, data, jobs[i], dense_weights, log);
  });
  return out;
}

std::string kind_label(TransformKind k) { return to_string(k); }

}  // namespace

CsvTable summary_table(const std::vector<RunSummary>& runs) {
  CsvTable t;
  t.header = {"kind", "budget", "alpha", "fraction", "params",
              "madds", "seed", "accuracy", "status"};
  for (const RunSummary& r : runs) {
    const bool ok = r.status == "ok";
    t.rows.push_back({r.kind, r.budget, format_double(r.alpha),
                      format_double(r.fraction),
                      ok ? std::to_string(r.params) : "",
                      ok ? std::to_string(r.madds) : "", std::to_string(r.seed),
                      ok ? format_double(r.accuracy) : "", r.status});
  }
  return t;
}

void write_outputs(const ExperimentConfig& config, const std::string& command,
                   const std::vector<RunSummary>& runs) {
  const fs::path out(config.out);
  fs::create_directories(out / "runs");
  write_file_atomic((out / "results.csv").string(),
                    summary_table(runs).to_string());
  ordered_json report;
  report["command"] = command;
  report["config"] = ordered_json::parse(experiment_config_to_json(config));
  report["runs"] = ordered_json::array();
  for (const RunSummary& r : runs) {
    if (r.status == "ok") {
      write_file_atomic((out / "runs" / (r.tag + ".jsonl")).string(),
                        to_jsonl(r.record.points));
    }
    ordered_json j;
    j["tag"] = r.tag;
    j["kind"] = r.kind;
    j["budget"] = r.budget;
    j["alpha"] = r.alpha;
    j["fraction"] = r.fraction;
    j["params"] = r.params;
    j["madds"] = r.madds;
    j["seed"] = r.seed;
    j["accuracy"] = r.accuracy;
    j["status"] = r.status;
    j["eval_points"] = r.record.points.size();
    j["wall_seconds"] = r.record.wall_seconds;
    report["runs"].push_back(j);
  }
  write_file_atomic((out / "report.json").string(), report.dump(2) + "\n");
}

std::vector<RunSummary> cmd_train(const ExperimentConfig& config,
                                  std::ostream& log) {
  std::vector<RunJob> jobs;
  for (std::uint64_t seed : config.seeds) {
    RunJob j;
    j.kind = kind_label(config.transform.kind);
    j.tag = fmt::format("train_{}_s{}", j.kind, seed);
    j.spec = config.transform;
    j.seed = seed;
    jobs.push_back(j);
  }
  auto runs = run_jobs(config, jobs, log);
  write_outputs(config, "train", runs);
  return runs;
}

std::vector<RunSummary> cmd_incremental(const ExperimentConfig& config,
                                        std::ostream& log) {
  if (!config.densify) {
    throw ConfigError("config.densify: required for incremental training");
  }
  std::vector<RunJob> jobs;
  for (std::uint64_t seed : config.seeds) {
    RunJob j;
    j.kind = "incremental";
    j.tag = fmt::format("incremental_s{}", seed);
    j.spec.kind = TransformKind::SparseRandom;
    j.spec.alpha = config.densify->initial_density;
    j.spec.sampler = config.transform.sampler;
    j.seed = seed;
    j.schedule = &*config.densify;
    jobs.push_back(j);
  }
  auto runs = run_jobs(config, jobs, log);
  write_outputs(config, "incremental", runs);
  return runs;
}

std::vector<RunSummary> cmd_sweep(const ExperimentConfig& config,
                                  std::ostream& log) {
  const std::int64_t dense =
      conv_weight_count(config.arch, full_masks(config.arch));
  std::vector<RunJob> jobs;
  for (TransformKind kind : config.sweep.kinds) {
    if (kind == TransformKind::Hybrid) {
      throw ConfigError("config.sweep.kinds: hybrid cannot be budget-matched");
    }
    for (double budget : config.sweep.budgets) {
      const auto target = static_cast<std::int64_t>(
          std::floor(budget * static_cast<double>(dense) + 1e-9));
      for (std::uint64_t seed : config.seeds) {
        RunJob j;
        j.kind = kind_label(kind);
        j.budget = format_double(budget);
        j.tag = fmt::format("sweep_{}_b{}_s{}", j.kind, j.budget, seed);
        j.seed = seed;
        j.spec.kind = kind;
        j.spec.sampler = config.transform.sampler;
        try {
          const BudgetMatch m = match_budget(config.arch, target, kind, seed);
          j.spec = m.spec;
          j.spec.sampler = config.transform.sampler;
        } catch (const UnreachableBudget& e) {
          j.fraction = budget;
          j.skip_reason = fmt::format(
              "budget {} ({} conv weights) is below the minimum of {}", j.budget,
              target, e.minimum());
        }
        jobs.push_back(j);
      }
    }
  }
  auto runs = run_jobs(config, jobs, log);
  std::stable_sort(runs.begin(), runs.end(),
                   [](const RunSummary& a, const RunSummary& b) {
                     if (a.kind != b.kind) return a.kind < b.kind;
                     if (a.params != b.params) return a.params > b.params;
                     return a.seed < b.seed;
                   });
  write_outputs(config, "sweep", runs);
  return runs;
}

namespace {

template <typename T>
bool verify_impl(const VerifyOptions& o, std::ostream& out) {
  Network<T> net = !o.checkpoint.empty()
                       ? load_checkpoint<T>(o.checkpoint)
                       : Network<T>(arch_from_json(read_file(o.arch)), o.seed);
  std::mt19937_64 rng(mix_seed(o.seed, 0x9e));
  const auto sizes = hidden_sizes(net.arch());
  const PermutationSet perms = PermutationSet::random(sizes, rng);
  Network<T> twin = permute_network(net, perms);
  const EquivalenceReport r = verify_equivalence(net, twin, o.trials, o.tol, o.seed);
  const BigInt size = equivalence_class_size(sizes);
  ordered_json j = ordered_json::parse(equivalence_report_to_json(r));
  j["hidden_sizes"] = sizes;
  j["equivalence_class_size"] = size.str();
  j["equivalence_class_digits"] = size.str().size();
  out << j.dump(2) << '\n';
  return r.pass;
}

}  // namespace

bool cmd_verify(const VerifyOptions& options, std::ostream& out) {
  if (options.checkpoint.empty() == options.arch.empty()) {
    throw ConfigError("verify: give exactly one of --checkpoint or --arch");
  }
  if (options.trials < 1) throw ConfigError("verify: --trials must be >= 1");
  if (!(options.tol > 0.0)) throw ConfigError("verify: --tol must be > 0");
  return options.precision == 64 ? verify_impl<double>(options, out)
                                 : verify_impl<float>(options, out);
}

void cmd_cost(const CostOptions& options, std::ostream& out) {
  const ArchSpec arch = arch_from_json(read_file(options.arch));
  const TransformedArch t = apply_transform(arch, options.transform);
  const CostReport r = cost_report(t.arch, t.masks);
  if (options.json) {
    out << cost_report_to_json(r) << '\n';
  } else {
    out << format_cost_table(r);
  }
}

}  // namespace chansparse::cli
