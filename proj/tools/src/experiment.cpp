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

#include "chansparse_cli/experiment.hpp"

#include <charconv>
#include <filesystem>
#include <set>

#include <json.hpp>

#include "chansparse/checkpoint.hpp"
#include "chansparse/errors.hpp"

namespace chansparse::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Field reader that reports "config.<path>" on any type or range problem and
// rejects unknown keys so typos do not silently fall back to defaults.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  bool has(const char* key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  const json& at(const char* key) {
    seen_.insert(key);
    return j_.at(key);
  }

  std::string where(const char* key) const { return path_ + "." + key; }

  template <typename V>
  void read(const char* key, V& out) {
    if (!has(key)) return;
    try {
      out = j_.at(key).get<V>();
    } catch (const json::exception&) {
      throw ConfigError(where(key) + ": wrong type");
    }
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) {
        throw ConfigError(path_ + ": unknown field '" + item.key() + "'");
      }
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_size(Fields& f, const char* key, std::size_t& out) {
  if (!f.has(key)) return;
  const json& v = f.at(key);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
    throw ConfigError(f.where(key) + ": expected a non-negative integer");
  }
  out = v.get<std::size_t>();
}

Sampler sampler_from_string(const std::string& s) {
  if (s == "fixed_fan_in") return Sampler::FixedFanIn;
  if (s == "bernoulli") return Sampler::Bernoulli;
  throw ConfigError("config.transform.sampler: expected fixed_fan_in or bernoulli");
}

std::string to_string(Sampler s) {
  return s == Sampler::FixedFanIn ? "fixed_fan_in" : "bernoulli";
}

std::string resolve(const std::string& base_dir, const std::string& p) {
  if (p.empty() || fs::path(p).is_absolute() || base_dir.empty()) return p;
  return (fs::path(base_dir) / p).lexically_normal().string();
}

TransformSpec parse_transform(const json& j) {
  Fields f(j, "config.transform");
  TransformSpec t;
  std::string kind = to_string(t.kind);
  f.read("kind", kind);
  t.kind = transform_kind_from_string(kind);
  f.read("alpha", t.alpha);
  f.read("depth", t.depth);
  if (f.has("sampler")) {
    std::string s;
    f.read("sampler", s);
    t.sampler = sampler_from_string(s);
  }
  f.finish();
  validate_alpha(t.alpha, "config.transform.alpha");
  validate_alpha(t.depth, "config.transform.depth");
  return t;
}

TrainConfig parse_train(const json& j) {
  Fields f(j, "config.train");
  TrainConfig t;
  read_size(f, "batch_size", t.batch_size);
  f.read("lr", t.lr);
  f.read("momentum", t.momentum);
  read_size(f, "epochs", t.epochs);
  read_size(f, "eval_every", t.eval_every);
  f.read("lr_decay", t.lr_decay);
  read_size(f, "lr_decay_epochs", t.lr_decay_epochs);
  read_size(f, "eval_samples", t.eval_samples);
  f.finish();
  return t;
}

DensifySchedule parse_densify(const json& j) {
  Fields f(j, "config.densify");
  DensifySchedule d;
  f.read("initial_density", d.initial_density);
  read_size(f, "period", d.period);
  if (f.has("growth")) {
    std::string g;
    f.read("growth", g);
    if (g == "double") {
      d.growth = Growth::Double;
    } else if (g == "none") {
      d.growth = Growth::None;
    } else {
      throw ConfigError("config.densify.growth: expected double or none");
    }
  }
  if (f.has("new_connections")) {
    std::string n;
    f.read("new_connections", n);
    if (n == "fresh") {
      d.new_connections = NewConnectionInit::Fresh;
    } else if (n == "zero") {
      d.new_connections = NewConnectionInit::Zero;
    } else {
      throw ConfigError("config.densify.new_connections: expected fresh or zero");
    }
  }
  f.finish();
  validate(d);
  return d;
}

DatasetConfig parse_dataset(const json& j, const std::string& base_dir) {
  Fields f(j, "config.dataset");
  DatasetConfig d;
  f.read("kind", d.kind);
  if (d.kind != "mnist" && d.kind != "synth") {
    throw ConfigError("config.dataset.kind: expected mnist or synth");
  }
  f.read("dir", d.dir);
  d.dir = resolve(base_dir, d.dir);
  read_size(f, "classes", d.synth.classes);
  read_size(f, "height", d.synth.height);
  read_size(f, "width", d.synth.width);
  read_size(f, "count", d.synth.count);
  f.read("noise", d.synth.noise);
  read_size(f, "test_count", d.synth_test_count);
  f.read("seed", d.synth_seed);
  read_size(f, "train_samples", d.train_samples);
  read_size(f, "test_samples", d.test_samples);
  f.finish();
  if (d.kind == "mnist" && d.dir.empty()) {
    throw ConfigError("config.dataset.dir: required for mnist");
  }
  return d;
}

SweepConfig parse_sweep(const json& j) {
  Fields f(j, "config.sweep");
  SweepConfig s;
  f.read("budgets", s.budgets);
  if (f.has("kinds")) {
    std::vector<std::string> names;
    f.read("kinds", names);
    s.kinds.clear();
    for (const auto& n : names) s.kinds.push_back(transform_kind_from_string(n));
  }
  f.finish();
  if (s.budgets.empty()) throw ConfigError("config.sweep.budgets: empty list");
  for (double b : s.budgets) validate_alpha(b, "config.sweep.budgets[]");
  return s;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& text,
                                         const std::string& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  Fields f(j, "config");
  int version = 0;
  f.read("schema_version", version);
  if (version != kSchemaVersion) {
    throw ConfigError("config.schema_version: expected " +
                      std::to_string(kSchemaVersion) + ", got " +
                      std::to_string(version));
  }
  ExperimentConfig c;
  if (!f.has("arch")) throw ConfigError("config.arch: required");
  const json& arch = f.at("arch");
  if (arch.is_string()) {
    c.arch_source = resolve(base_dir, arch.get<std::string>());
    c.arch = arch_from_json(read_file(c.arch_source));
  } else {
    c.arch_source = "<inline>";
    c.arch = arch_from_json(arch.dump());
  }
  if (f.has("transform")) c.transform = parse_transform(f.at("transform"));
  if (f.has("train")) c.train = parse_train(f.at("train"));
  if (f.has("densify")) c.densify = parse_densify(f.at("densify"));
  if (f.has("dataset")) c.dataset = parse_dataset(f.at("dataset"), base_dir);
  if (f.has("sweep")) c.sweep = parse_sweep(f.at("sweep"));
  f.read("out", c.out);
  c.out = resolve(base_dir, c.out);
  f.read("seeds", c.seeds);
  read_size(f, "threads", c.threads);
  f.read("precision", c.train.precision);
  f.finish();
  if (c.seeds.empty()) throw ConfigError("config.seeds: must not be empty");
  if (c.threads < 1) throw ConfigError("config.threads: must be >= 1");
  validate(c.train);
  return c;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  const std::string text = read_file(path);
  return parse_experiment_config(text, fs::path(path).parent_path().string());
}

std::string experiment_config_to_json(const ExperimentConfig& c) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["arch"] = ordered_json::parse(arch_to_json(c.arch));
  j["transform"] = {{"kind", to_string(c.transform.kind)},
                    {"alpha", c.transform.alpha},
                    {"depth", c.transform.depth},
                    {"sampler", to_string(c.transform.sampler)}};
  j["train"] = {{"batch_size", c.train.batch_size},
                {"lr", c.train.lr},
                {"momentum", c.train.momentum},
                {"epochs", c.train.epochs},
                {"eval_every", c.train.eval_every},
                {"lr_decay", c.train.lr_decay},
                {"lr_decay_epochs", c.train.lr_decay_epochs},
                {"eval_samples", c.train.eval_samples}};
  if (c.densify) {
    j["densify"] = {
        {"initial_density", c.densify->initial_density},
        {"period", c.densify->period},
        {"growth", c.densify->growth == Growth::Double ? "double" : "none"},
        {"new_connections", c.densify->new_connections == NewConnectionInit::Fresh
                                ? "fresh"
                                : "zero"}};
  }
  ordered_json d;
  d["kind"] = c.dataset.kind;
  if (c.dataset.kind == "mnist") {
    d["dir"] = c.dataset.dir;
  } else {
    d["classes"] = c.dataset.synth.classes;
    d["height"] = c.dataset.synth.height;
    d["width"] = c.dataset.synth.width;
    d["count"] = c.dataset.synth.count;
    d["noise"] = c.dataset.synth.noise;
    d["test_count"] = c.dataset.synth_test_count;
    d["seed"] = c.dataset.synth_seed;
  }
  d["train_samples"] = c.dataset.train_samples;
  d["test_samples"] = c.dataset.test_samples;
  j["dataset"] = d;
  ordered_json kinds = ordered_json::array();
  for (TransformKind k : c.sweep.kinds) kinds.push_back(to_string(k));
  j["sweep"] = {{"budgets", c.sweep.budgets}, {"kinds", kinds}};
  j["out"] = c.out;
  j["seeds"] = c.seeds;
  j["threads"] = c.threads;
  j["precision"] = c.train.precision;
  return j.dump(2);
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = std::min(text.find(',', start), text.size());
    const std::string item = text.substr(start, comma - start);
    std::uint64_t v = 0;
    const auto r = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || r.ec != std::errc{} || r.ptr != item.data() + item.size()) {
      throw ConfigError("--seeds: '" + item + "' is not an unsigned integer");
    }
    seeds.push_back(v);
    start = comma + 1;
  }
  return seeds;
}

LoadedData load_data(const DatasetConfig& config) {
  LoadedData d;
  if (config.kind == "mnist") {
    if (!fs::is_directory(config.dir)) {
      throw ConfigError("dataset directory not found: " + config.dir);
    }
    d.train = load_mnist_train(config.dir);
    d.test = load_mnist_test(config.dir);
  } else {
    d.train = synth_dataset(config.synth, mix_seed(config.synth_seed, 0));
    SynthSpec test_spec = config.synth;
    test_spec.count = config.synth_test_count;
    d.test = synth_dataset(test_spec, mix_seed(config.synth_seed, 1));
  }
  if (config.train_samples > 0 && config.train_samples < d.train.size()) {
    d.train = d.train.slice(0, config.train_samples);
  }
  if (config.test_samples > 0 && config.test_samples < d.test.size()) {
    d.test = d.test.slice(0, config.test_samples);
  }
  return d;
}

}  // namespace chansparse::cli
