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

#include <json.hpp>

#include "chansparse/connectivity.hpp"

namespace chansparse::detail {

nlohmann::json arch_to_json_value(const ArchSpec& arch);
ArchSpec arch_from_json_value(const nlohmann::json& j);

nlohmann::json mask_to_json_value(const ConnectivityMask& mask);
ConnectivityMask mask_from_json_value(const nlohmann::json& j);

/// Parses `text`, converting parse errors into ConfigError with line and
/// column of the offending byte.
nlohmann::json parse_json(const std::string& text, const std::string& what);

}  // namespace chansparse::detail
