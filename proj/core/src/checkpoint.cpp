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

#include "chansparse/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json_internal.hpp"

namespace chansparse {

namespace {

constexpr char kMagic[4] = {'C', 'S', 'P', 'K'};

template <typename U>
void put_le(std::string& out, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    out.push_back(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xff));
  }
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  std::size_t offset() const { return pos_; }

  const char* take(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n) {
      throw FormatError(std::string("checkpoint truncated while reading ") + what,
                        pos_);
    }
    const char* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }

  template <typename U>
  U le(const char* what) {
    const char* p = take(sizeof(U), what);
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
    }
    return static_cast<U>(v);
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

void write_file_atomic(const std::string& path, const std::string& bytes) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <typename T>
std::string serialize_checkpoint(Network<T>& net, const std::string& extra_json) {
  using nlohmann::json;
  json masks = json::array();
  for (const ConnectivityMask& m : net.masks()) {
    masks.push_back(detail::mask_to_json_value(m));
  }
  json blocks = json::array();
  const auto state = net.state();
  for (const NamedBuffer<T>& b : state) {
    blocks.push_back({{"name", b.name}, {"count", b.data->size()}});
  }
  const json header{{"format_version", kCheckpointVersion},
                    {"arch", detail::arch_to_json_value(net.arch())},
                    {"masks", masks},
                    {"seed", net.seed()},
                    {"extra", detail::parse_json(extra_json, "checkpoint extra")},
                    {"blocks", blocks}};
  const std::string header_text = header.dump();

  std::string out(kMagic, sizeof kMagic);
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint64_t>(out, header_text.size());
  out += header_text;
  for (const NamedBuffer<T>& b : state) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(b.name.size()));
    out += b.name;
    put_le<std::uint64_t>(out, b.data->size());
    for (T v : *b.data) {
      put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    }
  }
  return out;
}

template <typename T>
Network<T> deserialize_checkpoint(const std::string& bytes,
                                  std::string* extra_json) {
  Reader r(bytes);
  const char* magic = r.take(sizeof kMagic, "magic");
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw FormatError("not a checkpoint (bad magic)", 0);
  }
  const auto version = r.le<std::uint32_t>("version");
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version),
                      4);
  }
  const auto header_len = r.le<std::uint64_t>("header length");
  const std::size_t header_at = r.offset();
  const char* header_ptr = r.take(header_len, "header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_ptr, header_ptr + header_len);
    if (header.at("format_version").get<std::uint32_t>() != version) {
      throw FormatError("header version disagrees with preamble", header_at);
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("corrupt checkpoint header: ") + e.what(),
                      header_at);
  }

  Network<T> net = [&] {
    try {
      std::vector<ConnectivityMask> masks;
      for (const auto& m : header.at("masks")) {
        masks.push_back(detail::mask_from_json_value(m));
      }
      return Network<T>(detail::arch_from_json_value(header.at("arch")),
                        std::move(masks), header.at("seed").get<std::uint64_t>());
    } catch (const std::exception& e) {
      throw FormatError(std::string("checkpoint header does not describe a "
                                    "valid network: ") + e.what(),
                        header_at);
    }
  }();
  if (extra_json != nullptr) {
    *extra_json = header.contains("extra") ? header.at("extra").dump() : "{}";
  }

  for (const NamedBuffer<T>& b : net.state()) {
    const std::size_t at = r.offset();
    const auto name_len = r.le<std::uint32_t>("block name length");
    const std::string name(r.take(name_len, "block name"), name_len);
    if (name != b.name) {
      throw FormatError("expected block '" + b.name + "', found '" + name + "'", at);
    }
    const auto count = r.le<std::uint64_t>("block size");
    if (count != b.data->size()) {
      throw FormatError("block '" + name + "' holds " + std::to_string(count) +
                            " values, network needs " +
                            std::to_string(b.data->size()),
                        at);
    }
    for (T& v : *b.data) {
      v = static_cast<T>(std::bit_cast<float>(r.le<std::uint32_t>("block data")));
    }
  }
  if (!r.done()) throw FormatError("trailing bytes after last block", r.offset());
  return net;
}

template <typename T>
void save_checkpoint(const std::string& path, Network<T>& net,
                     const std::string& extra_json) {
  write_file_atomic(path, serialize_checkpoint(net, extra_json));
}

template <typename T>
Network<T> load_checkpoint(const std::string& path, std::string* extra_json) {
  return deserialize_checkpoint<T>(read_file(path), extra_json);
}

#define CHANSPARSE_INSTANTIATE_CKPT(T)                                        \
  template std::string serialize_checkpoint(Network<T>&, const std::string&); \
  template Network<T> deserialize_checkpoint(const std::string&,              \
                                             std::string*);                   \
  template void save_checkpoint(const std::string&, Network<T>&,              \
                                const std::string&);                          \
  template Network<T> load_checkpoint(const std::string&, std::string*);

CHANSPARSE_INSTANTIATE_CKPT(float)
CHANSPARSE_INSTANTIATE_CKPT(double)

#undef CHANSPARSE_INSTANTIATE_CKPT

}  // namespace chansparse
