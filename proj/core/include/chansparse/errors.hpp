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
#include <stdexcept>
#include <string>

namespace chansparse {

/// Tensor or layer dimensions disagree. `axis()` names the offending axis
/// ("channels", "height", "kernel_width", ...).
class ShapeError : public std::invalid_argument {
 public:
  ShapeError(std::string axis, const std::string& what);
  const std::string& axis() const noexcept { return axis_; }

 private:
  std::string axis_;
};

/// Invalid user-supplied configuration (alpha out of range, eps <= 0, bad
/// architecture description, missing files).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed or truncated on-disk artifact (IDX file, checkpoint, mask JSON).
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::uint64_t offset);
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

/// Training produced a non-finite loss.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace chansparse
