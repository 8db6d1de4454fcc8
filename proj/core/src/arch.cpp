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

#include <string>

#include "chansparse/connectivity.hpp"
#include "json_internal.hpp"

namespace chansparse {

namespace {

struct ShapeWalker {
  std::size_t c, h, w;
  bool flat = false;
  std::size_t features = 0;
};

std::string where(std::size_t i) { return "layers[" + std::to_string(i) + "]"; }

}  // namespace

std::vector<ConvInterface> conv_interfaces(const ArchSpec& arch) {
  validate_arch(arch);
  std::vector<ConvInterface> out;
  std::size_t c = arch.in_channels, h = arch.in_height, w = arch.in_width;
  for (std::size_t i = 0; i < arch.layers.size(); ++i) {
    if (const auto* conv = std::get_if<ConvSpec>(&arch.layers[i])) {
      const ConvGeometry g = make_conv_geometry(c, h, w, conv->kernel_h,
                                                conv->kernel_w, conv->stride,
                                                conv->padding);
      out.push_back({i, c, conv->out_channels, conv->kernel_h, conv->kernel_w,
                     g.out_h, g.out_w});
      c = conv->out_channels;
      h = g.out_h;
      w = g.out_w;
    } else if (std::holds_alternative<MaxPoolSpec>(arch.layers[i])) {
      h = (h + 1) / 2;
      w = (w + 1) / 2;
    }
  }
  return out;
}

void validate_arch(const ArchSpec& arch) {
  if (arch.in_channels == 0 || arch.in_height == 0 || arch.in_width == 0) {
    throw ConfigError("input dims must be >= 1");
  }
  if (arch.classes < 2) throw ConfigError("classes must be >= 2");
  if (arch.layers.empty()) throw ConfigError("layers: empty layer list");
  ShapeWalker s{arch.in_channels, arch.in_height, arch.in_width};
  std::size_t last_fc_out = 0;
  for (std::size_t i = 0; i < arch.layers.size(); ++i) {
    const LayerSpec& layer = arch.layers[i];
    const bool last = i + 1 == arch.layers.size();
    if (const auto* conv = std::get_if<ConvSpec>(&layer)) {
      if (s.flat) throw ConfigError(where(i) + ": conv after flatten");
      if (conv->out_channels == 0) throw ConfigError(where(i) + ".out: must be >= 1");
      if (conv->kernel_h == 0 || conv->kernel_w == 0) {
        throw ConfigError(where(i) + ".kernel: must be >= 1");
      }
      if (conv->stride == 0) throw ConfigError(where(i) + ".stride: must be >= 1");
      try {
        const ConvGeometry g = make_conv_geometry(
            s.c, s.h, s.w, conv->kernel_h, conv->kernel_w, conv->stride,
            conv->padding);
        s.h = g.out_h;
        s.w = g.out_w;
      } catch (const ShapeError& e) {
        throw ConfigError(where(i) + ": " + e.what());
      }
      s.c = conv->out_channels;
    } else if (std::holds_alternative<MaxPoolSpec>(layer)) {
      if (s.flat) throw ConfigError(where(i) + ": maxpool after flatten");
      s.h = (s.h + 1) / 2;
      s.w = (s.w + 1) / 2;
    } else if (std::holds_alternative<FlattenSpec>(layer)) {
      if (s.flat) throw ConfigError(where(i) + ": second flatten");
      s.flat = true;
      s.features = s.c * s.h * s.w;
    } else if (const auto* fc = std::get_if<FcSpec>(&layer)) {
      if (!s.flat) throw ConfigError(where(i) + ": fc requires a preceding flatten");
      if (fc->out_features == 0) throw ConfigError(where(i) + ".out: must be >= 1");
      s.features = fc->out_features;
      last_fc_out = fc->out_features;
    } else {
      if (!last) throw ConfigError(where(i) + ": softmax_xent must be the last layer");
      if (!s.flat || last_fc_out == 0) {
        throw ConfigError(where(i) + ": softmax_xent must follow an fc layer");
      }
      if (std::holds_alternative<FcSpec>(arch.layers[i - 1]) == false) {
        throw ConfigError(where(i) + ": softmax_xent must directly follow an fc layer");
      }
      if (s.features != arch.classes) {
        throw ConfigError(where(i - 1) + ".out: classifier emits " +
                          std::to_string(s.features) + " features but classes = " +
                          std::to_string(arch.classes));
      }
    }
  }
  if (!std::holds_alternative<SoftmaxXentSpec>(arch.layers.back())) {
    throw ConfigError("layers: the last layer must be softmax_xent");
  }
}

namespace detail {

using nlohmann::json;

namespace {

std::size_t positive(const json& j, const std::string& field, const std::string& at) {
  if (!j.contains(field)) throw ConfigError(at + "." + field + ": missing");
  const json& v = j.at(field);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 1) {
    throw ConfigError(at + "." + field + ": expected a positive integer, got " +
                      v.dump());
  }
  return v.get<std::size_t>();
}

}  // namespace

json arch_to_json_value(const ArchSpec& arch) {
  json layers = json::array();
  for (const LayerSpec& layer : arch.layers) {
    if (const auto* c = std::get_if<ConvSpec>(&layer)) {
      layers.push_back({{"type", "conv"},
                        {"out", c->out_channels},
                        {"kernel", {c->kernel_h, c->kernel_w}},
                        {"stride", c->stride},
                        {"padding", c->padding == Padding::Same ? "same" : "valid"},
                        {"batch_norm", c->batch_norm}});
    } else if (std::holds_alternative<MaxPoolSpec>(layer)) {
      layers.push_back({{"type", "maxpool"}});
    } else if (std::holds_alternative<FlattenSpec>(layer)) {
      layers.push_back({{"type", "flatten"}});
    } else if (const auto* f = std::get_if<FcSpec>(&layer)) {
      layers.push_back({{"type", "fc"}, {"out", f->out_features}});
    } else {
      layers.push_back({{"type", "softmax_xent"}});
    }
  }
  return json{{"input",
               {{"channels", arch.in_channels},
                {"height", arch.in_height},
                {"width", arch.in_width}}},
              {"classes", arch.classes},
              {"layers", layers}};
}

ArchSpec arch_from_json_value(const json& j) {
  if (!j.is_object()) throw ConfigError("arch: expected a JSON object");
  ArchSpec arch;
  if (!j.contains("input") || !j.at("input").is_object()) {
    throw ConfigError("input: missing object {channels, height, width}");
  }
  arch.in_channels = positive(j.at("input"), "channels", "input");
  arch.in_height = positive(j.at("input"), "height", "input");
  arch.in_width = positive(j.at("input"), "width", "input");
  arch.classes = positive(j, "classes", "arch");
  if (!j.contains("layers") || !j.at("layers").is_array()) {
    throw ConfigError("layers: missing array");
  }
  const json& layers = j.at("layers");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const json& l = layers[i];
    const std::string at = where(i);
    if (!l.is_object() || !l.contains("type") || !l.at("type").is_string()) {
      throw ConfigError(at + ".type: missing layer type");
    }
    const std::string type = l.at("type").get<std::string>();
    if (type == "conv") {
      ConvSpec c;
      c.out_channels = positive(l, "out", at);
      if (!l.contains("kernel")) throw ConfigError(at + ".kernel: missing");
      const json& k = l.at("kernel");
      if (k.is_array()) {
        if (k.size() != 2 || !k[0].is_number_integer() || !k[1].is_number_integer() ||
            k[0].get<std::int64_t>() < 1 || k[1].get<std::int64_t>() < 1) {
          throw ConfigError(at + ".kernel: expected [kh, kw] of positive integers");
        }
        c.kernel_h = k[0].get<std::size_t>();
        c.kernel_w = k[1].get<std::size_t>();
      } else {
        c.kernel_h = c.kernel_w = positive(l, "kernel", at);
      }
      if (l.contains("stride")) c.stride = positive(l, "stride", at);
      if (l.contains("padding")) {
        const json& p = l.at("padding");
        const std::string pad = p.is_string() ? p.get<std::string>() : "";
        if (pad == "same") {
          c.padding = Padding::Same;
        } else if (pad == "valid") {
          c.padding = Padding::Valid;
        } else {
          throw ConfigError(at + ".padding: expected \"same\" or \"valid\", got " +
                            p.dump());
        }
      }
      if (l.contains("batch_norm")) {
        if (!l.at("batch_norm").is_boolean()) {
          throw ConfigError(at + ".batch_norm: expected a boolean");
        }
        c.batch_norm = l.at("batch_norm").get<bool>();
      }
      arch.layers.emplace_back(c);
    } else if (type == "maxpool") {
      arch.layers.emplace_back(MaxPoolSpec{});
    } else if (type == "flatten") {
      arch.layers.emplace_back(FlattenSpec{});
    } else if (type == "fc") {
      arch.layers.emplace_back(FcSpec{positive(l, "out", at)});
    } else if (type == "softmax_xent") {
      arch.layers.emplace_back(SoftmaxXentSpec{});
    } else {
      throw ConfigError(at + ".type: unknown layer type \"" + type + "\"");
    }
  }
  validate_arch(arch);
  return arch;
}

json mask_to_json_value(const ConnectivityMask& mask) {
  json active = json::array();
  for (std::size_t o = 0; o < mask.n_out(); ++o) {
    for (std::size_t i = 0; i < mask.n_in(); ++i) {
      if (mask.active(o, i)) active.push_back({o, i});
    }
  }
  return json{{"n_in", mask.n_in()},
              {"n_out", mask.n_out()},
              {"seed", mask.seed()},
              {"active", active}};
}

ConnectivityMask mask_from_json_value(const json& j) {
  if (!j.is_object()) throw ConfigError("mask: expected a JSON object");
  const std::size_t n_in = positive(j, "n_in", "mask");
  const std::size_t n_out = positive(j, "n_out", "mask");
  std::uint64_t seed = 0;
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_integer()) {
      throw ConfigError("mask.seed: expected an integer");
    }
    seed = j.at("seed").get<std::uint64_t>();
  }
  if (!j.contains("active") || !j.at("active").is_array()) {
    throw ConfigError("mask.active: missing array");
  }
  ConnectivityMask m(n_in, n_out, seed);
  const json& active = j.at("active");
  for (std::size_t k = 0; k < active.size(); ++k) {
    const json& p = active[k];
    if (!p.is_array() || p.size() != 2 || !p[0].is_number_unsigned() ||
        !p[1].is_number_unsigned()) {
      throw ConfigError("mask.active[" + std::to_string(k) +
                        "]: expected [out, in] pair");
    }
    const auto o = p[0].get<std::size_t>();
    const auto i = p[1].get<std::size_t>();
    if (o >= n_out || i >= n_in) {
      throw ConfigError("mask.active[" + std::to_string(k) + "]: index out of range");
    }
    m.set(o, i);
  }
  return m;
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t k = 0; k + 1 < e.byte && k < text.size(); ++k) {
      if (text[k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(what + ": JSON parse error at line " + std::to_string(line) +
                      ", column " + std::to_string(col) + ": " + e.what());
  }
}

}  // namespace detail

std::string arch_to_json(const ArchSpec& arch) {
  return detail::arch_to_json_value(arch).dump(2);
}

ArchSpec arch_from_json(const std::string& text) {
  return detail::arch_from_json_value(detail::parse_json(text, "arch"));
}

std::string mask_to_json(const ConnectivityMask& mask) {
  return detail::mask_to_json_value(mask).dump();
}

ConnectivityMask mask_from_json(const std::string& text) {
  return detail::mask_from_json_value(detail::parse_json(text, "mask"));
}

}  // namespace chansparse
