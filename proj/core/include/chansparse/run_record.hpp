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

namespace chansparse {

struct EvalPoint {
  std::size_t step = 0;
  /// Scheduled connection density (realized density without a schedule).
  double density = 1.0;
  double realized_density = 1.0;
  std::int64_t params = 0;
  std::int64_t madds = 0;
  double train_loss = 0.0;
  double test_accuracy = 0.0;
  friend bool operator==(const EvalPoint&, const EvalPoint&) = default;
};

struct RunRecord {
  std::vector<EvalPoint> points;
  double wall_seconds = 0.0;
};

/// One JSON object per line, fields in EvalPoint order.
std::string eval_point_to_json(const EvalPoint& p);
EvalPoint eval_point_from_json(const std::string& line);
std::string to_jsonl(const std::vector<EvalPoint>& points);
std::vector<EvalPoint> from_jsonl(const std::string& text);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

/// Comma-separated table with a header row. Cells never contain commas.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string to_string() const;
  static CsvTable parse(const std::string& text);
  /// Index of `column` in the header; throws if absent.
  std::size_t column(const std::string& name) const;
  friend bool operator==(const CsvTable&, const CsvTable&) = default;
};

}  // namespace chansparse
