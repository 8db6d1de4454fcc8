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

// Checkpoint container:
//
//   bytes 0..3   magic "CSPK"
//   u32 LE       format version (1)
//   u64 LE       header length L
//   L bytes      UTF-8 JSON header {format_version, arch, masks, seed,
//                extra, blocks: [{name, count}, ...]}
//   per block    u32 LE name length, name bytes, u64 LE value count,
//                count IEEE-754 binary32 values, little-endian
//
// Blocks follow Network::state() declaration order.

#include <cstdint>
#include <string>

#include "chansparse/network.hpp"

namespace chansparse {

inline constexpr std::uint32_t kCheckpointVersion = 1;

template <typename T>
std::string serialize_checkpoint(Network<T>& net,
                                 const std::string& extra_json = "{}");

/// Throws FormatError on any structural problem.
template <typename T>
Network<T> deserialize_checkpoint(const std::string& bytes,
                                  std::string* extra_json = nullptr);

template <typename T>
void save_checkpoint(const std::string& path, Network<T>& net,
                     const std::string& extra_json = "{}");

template <typename T>
Network<T> load_checkpoint(const std::string& path,
                           std::string* extra_json = nullptr);

/// Writes via a temporary sibling file and rename().
void write_file_atomic(const std::string& path, const std::string& bytes);
std::string read_file(const std::string& path);

}  // namespace chansparse
