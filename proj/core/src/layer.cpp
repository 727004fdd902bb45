/*
 * Copyright 2026 The sbrsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "sbrsim/layer.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <string>

#include "sbrsim/error.hpp"

namespace sbrsim {

namespace {

std::string lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

std::string_view to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::Conv2D: return "conv2d";
    case LayerKind::FullyConnected: return "fc";
    case LayerKind::MaxPool: return "maxpool";
  }
  return "?";
}

std::string_view to_string(SkipMode mode) {
  switch (mode) {
    case SkipMode::NoSkip: return "noskip";
    case SkipMode::InputSkip: return "input";
    case SkipMode::HybridSkip: return "hybrid";
    case SkipMode::InOutSkip: return "inout";
  }
  return "?";
}

std::string_view to_string(AccumulateMode mode) {
  return mode == AccumulateMode::Exact ? "exact" : "chained";
}

std::string_view to_string(SpeculationMode mode) {
  return mode == SpeculationMode::MM ? "mm" : "mm+lm";
}

LayerKind parse_layer_kind(std::string_view text) {
  const std::string t = lower(text);
  if (t == "conv2d" || t == "conv") return LayerKind::Conv2D;
  if (t == "fc" || t == "fullyconnected" || t == "fully_connected") return LayerKind::FullyConnected;
  if (t == "maxpool" || t == "pool") return LayerKind::MaxPool;
  throw FormatError(fmt::format("unknown layer kind '{}'", text));
}

SkipMode parse_skip_mode(std::string_view text) {
  const std::string t = lower(text);
  if (t == "noskip" || t == "none") return SkipMode::NoSkip;
  if (t == "input" || t == "inputskip") return SkipMode::InputSkip;
  if (t == "hybrid" || t == "hybridskip") return SkipMode::HybridSkip;
  if (t == "inout" || t == "inoutskip") return SkipMode::InOutSkip;
  throw FormatError(fmt::format("unknown skip mode '{}'", text));
}

AccumulateMode parse_accumulate_mode(std::string_view text) {
  const std::string t = lower(text);
  if (t == "exact") return AccumulateMode::Exact;
  if (t == "chained") return AccumulateMode::Chained;
  throw FormatError(fmt::format("unknown accumulate mode '{}'", text));
}

SpeculationMode parse_speculation_mode(std::string_view text) {
  const std::string t = lower(text);
  if (t == "mm") return SpeculationMode::MM;
  if (t == "mm+lm" || t == "mm_plus_lm" || t == "mmlm") return SpeculationMode::MMPlusLM;
  throw FormatError(fmt::format("unknown speculation mode '{}'", text));
}

bool is_supported_pool_window(int window) {
  constexpr std::array<int, 5> kWindows{4, 16, 32, 40, 64};
  return std::find(kWindows.begin(), kWindows.end(), window) != kWindows.end();
}

ConvGeometry LayerDescriptor::geometry() const {
  ConvGeometry g;
  g.in_channels = in_channels;
  g.out_channels = kind == LayerKind::MaxPool ? in_channels : out_channels;
  if (kind == LayerKind::FullyConnected) return g;
  g.in_height = in_height;
  g.in_width = in_width;
  g.kernel_h = kernel_h;
  g.kernel_w = kernel_w;
  g.stride = stride;
  g.padding = padding;
  if (kind == LayerKind::MaxPool) {
    g.kernel_h = g.kernel_w = 1;
    g.stride = 1;
    g.padding = 0;
  }
  return g;
}

void LayerDescriptor::validate() const {
  auto fail = [&](const std::string& why) {
    throw GeometryError(fmt::format("layer '{}': {}", name, why));
  };
  if (in_channels < 1 || out_channels < 1) fail("channel counts must be positive");
  if (kind != LayerKind::FullyConnected) {
    if (in_height < 1 || in_width < 1) fail("spatial dims must be positive");
    if (kind == LayerKind::Conv2D) {
      if (kernel_h < 1 || kernel_w < 1 || stride < 1 || padding < 0) fail("bad kernel geometry");
      if (in_height + 2 * padding < kernel_h || in_width + 2 * padding < kernel_w) {
        fail("kernel larger than padded input");
      }
    }
  }
  if (pool_window != 0) {
    if (kind == LayerKind::FullyConnected) fail("fully connected layers cannot pool");
    if (!is_supported_pool_window(pool_window)) {
      fail(fmt::format("pool window {} not in {{4, 16, 32, 40, 64}}", pool_window));
    }
    if (geometry().output_positions() % static_cast<std::size_t>(pool_window) != 0) {
      fail("output positions not divisible by the pool window");
    }
  } else if (kind == LayerKind::MaxPool) {
    fail("max-pool layer needs a pool window");
  }
  if (has_weights() && input_slices.width() != weight_slices.width()) {
    fail("input and weight slices must share one width");
  }
  if (speculation.candidates < 1 || speculation.channel_group < 1) fail("bad speculation config");
  if (pooled() && speculation.candidates > pool_window) fail("more candidates than window size");
}

std::vector<std::size_t> LayerDescriptor::input_dims() const {
  if (kind == LayerKind::FullyConnected) return {static_cast<std::size_t>(in_channels)};
  return {static_cast<std::size_t>(in_channels), static_cast<std::size_t>(in_height),
          static_cast<std::size_t>(in_width)};
}

std::vector<std::size_t> LayerDescriptor::weight_dims() const {
  if (kind == LayerKind::MaxPool) return {0};
  if (kind == LayerKind::FullyConnected) {
    return {static_cast<std::size_t>(out_channels), static_cast<std::size_t>(in_channels)};
  }
  return {static_cast<std::size_t>(out_channels), static_cast<std::size_t>(in_channels),
          static_cast<std::size_t>(kernel_h), static_cast<std::size_t>(kernel_w)};
}

std::vector<std::size_t> LayerDescriptor::conv_output_dims() const {
  const ConvGeometry g = geometry();
  if (kind == LayerKind::FullyConnected) return {static_cast<std::size_t>(out_channels)};
  return {static_cast<std::size_t>(g.out_channels), static_cast<std::size_t>(g.out_height()),
          static_cast<std::size_t>(g.out_width())};
}

std::vector<std::size_t> LayerDescriptor::output_dims() const {
  if (!pooled()) return conv_output_dims();
  const ConvGeometry g = geometry();
  return {static_cast<std::size_t>(g.out_channels),
          g.output_positions() / static_cast<std::size_t>(pool_window)};
}

}  // namespace sbrsim
