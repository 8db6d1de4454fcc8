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

#include "chansparse/run_record.hpp"

#include <charconv>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "chansparse/errors.hpp"

namespace chansparse {

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string eval_point_to_json(const EvalPoint& p) {
  nlohmann::ordered_json j;
  j["step"] = p.step;
  j["density"] = p.density;
  j["realized_density"] = p.realized_density;
  j["params"] = p.params;
  j["madds"] = p.madds;
  j["train_loss"] = p.train_loss;
  j["test_accuracy"] = p.test_accuracy;
  return j.dump();
}

EvalPoint eval_point_from_json(const std::string& line) {
  try {
    const auto j = nlohmann::json::parse(line);
    EvalPoint p;
    p.step = j.at("step").get<std::size_t>();
    p.density = j.at("density").get<double>();
    p.realized_density = j.at("realized_density").get<double>();
    p.params = j.at("params").get<std::int64_t>();
    p.madds = j.at("madds").get<std::int64_t>();
    p.train_loss = j.at("train_loss").get<double>();
    p.test_accuracy = j.at("test_accuracy").get<double>();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad eval point: ") + e.what(), 0);
  }
}

std::string to_jsonl(const std::vector<EvalPoint>& points) {
  std::string out;
  for (const EvalPoint& p : points) {
    out += eval_point_to_json(p);
    out += '\n';
  }
  return out;
}

std::vector<EvalPoint> from_jsonl(const std::string& text) {
  std::vector<EvalPoint> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(eval_point_from_json(line));
  }
  return out;
}

std::string CsvTable::to_string() const {
  std::string out;
  auto emit = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  emit(header);
  for (const auto& r : rows) emit(r);
  return out;
}

CsvTable CsvTable::parse(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      cells.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (first) {
      t.header = std::move(cells);
      first = false;
    } else {
      if (cells.size() != t.header.size()) {
        throw FormatError("csv row has " + std::to_string(cells.size()) +
                              " cells, header has " +
                              std::to_string(t.header.size()),
                          0);
      }
      t.rows.push_back(std::move(cells));
    }
  }
  return t;
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw std::out_of_range("csv has no column '" + name + "'");
}

}  // namespace chansparse
