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

#include "chansparse/errors.hpp"

#include <utility>

namespace chansparse {

ShapeError::ShapeError(std::string axis, const std::string& what)
    : std::invalid_argument("shape mismatch on axis '" + axis + "': " + what),
      axis_(std::move(axis)) {}

FormatError::FormatError(const std::string& what, std::uint64_t offset)
    : std::runtime_error(what + " (at byte offset " + std::to_string(offset) +
                         ")"),
      offset_(offset) {}

}  // namespace chansparse
