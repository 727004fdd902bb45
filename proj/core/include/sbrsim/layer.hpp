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

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "sbrsim/codec.hpp"

namespace sbrsim {

enum class LayerKind { Conv2D, FullyConnected, MaxPool };

enum class SkipMode {
  NoSkip,      ///< every sub-word is processed
  InputSkip,   ///< zero input sub-words are always skipped
  HybridSkip,  ///< DSM chooses input, weight, or no skipping per pass
  InOutSkip,   ///< hybrid skipping plus output speculation on pooled layers
};

enum class AccumulateMode {
  Exact,    ///< wide accumulation of Σ P_ij · B^(i+j)
  Chained,  ///< per-hop arithmetic shift along the accumulation chain
};

enum class SpeculationMode {
  MM,        ///< score = I_M × W_M
  MMPlusLM,  ///< score = I_M × W_M + Σ I_L × W_M
};

struct SpeculationConfig {
  SpeculationMode mode = SpeculationMode::MM;
  int candidates = 4;     ///< k kept per pooling window and channel
  int channel_group = 4;  ///< output channels masked together
};

std::string_view to_string(LayerKind kind);
std::string_view to_string(SkipMode mode);
std::string_view to_string(AccumulateMode mode);
std::string_view to_string(SpeculationMode mode);
LayerKind parse_layer_kind(std::string_view text);
SkipMode parse_skip_mode(std::string_view text);
AccumulateMode parse_accumulate_mode(std::string_view text);
SpeculationMode parse_speculation_mode(std::string_view text);

bool is_supported_pool_window(int window);

/// Convolution geometry shared by every pass of one layer.
struct ConvGeometry {
  int in_channels = 1;
  int in_height = 1;
  int in_width = 1;
  int out_channels = 1;
  int kernel_h = 1;
  int kernel_w = 1;
  int stride = 1;
  int padding = 0;

  int out_height() const { return (in_height + 2 * padding - kernel_h) / stride + 1; }
  int out_width() const { return (in_width + 2 * padding - kernel_w) / stride + 1; }
  int kernel_size() const { return kernel_h * kernel_w; }
  std::size_t output_positions() const {
    return static_cast<std::size_t>(out_height()) * out_width();
  }
  /// Nominal multiply count of one slice pass.
  std::size_t nominal_macs() const {
    return static_cast<std::size_t>(out_channels) * output_positions() * in_channels *
           kernel_size();
  }
};

/// One simulated layer: geometry, operand precisions, and execution mode.
struct LayerDescriptor {
  std::string name = "layer";
  LayerKind kind = LayerKind::Conv2D;
  int in_channels = 1;
  int in_height = 1;
  int in_width = 1;
  int out_channels = 1;
  int kernel_h = 1;
  int kernel_w = 1;
  int stride = 1;
  int padding = 0;
  int pool_window = 0;  ///< 0 disables max pooling
  SliceConfig input_slices{4, 2};
  SliceConfig weight_slices{4, 2};
  SkipMode skip_mode = SkipMode::NoSkip;
  SpeculationConfig speculation;

  /// Throws GeometryError when dims are inconsistent.
  void validate() const;

  bool has_weights() const { return kind != LayerKind::MaxPool; }
  bool pooled() const { return pool_window > 0; }
  ConvGeometry geometry() const;

  std::vector<std::size_t> input_dims() const;
  std::vector<std::size_t> weight_dims() const;
  /// Dims of the conv result before pooling: [OC, OH, OW] (or [OC] for FC).
  std::vector<std::size_t> conv_output_dims() const;
  /// Dims of the final output, after pooling if any.
  std::vector<std::size_t> output_dims() const;
};

}  // namespace sbrsim
