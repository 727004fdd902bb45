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

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "sbrsim/codec.hpp"

namespace sbrsim {

enum class Distribution { Laplace, Gaussian };
enum class Activation { None, Relu, LeakyRelu, Elu };

std::string_view to_string(Distribution d);
std::string_view to_string(Activation a);
Distribution parse_distribution(std::string_view text);
Activation parse_activation(std::string_view text);

struct SyntheticSpec {
  Distribution distribution = Distribution::Laplace;
  Activation activation = Activation::None;
  double spread = 1.0;  ///< Laplace scale b or Gaussian sigma
  double bias = 0.0;    ///< added before the activation
  /// Exact-zero fraction the quantizer scale is solved for; without it the
  /// largest magnitude maps to full scale.
  std::optional<double> target_zero_fraction;
  /// Precision the target refers to. Other precisions keep its quantizer
  /// step, scaled by 2^(p - calibration_precision).
  std::optional<int> calibration_precision;
};

struct SyntheticInfo {
  double scale = 0.0;  ///< quantization multiplier
  double zero_fraction = 0.0;
  double saturated_fraction = 0.0;
};

/// Activation values before quantization, deterministic per seed.
std::vector<double> sample_activations(const SyntheticSpec& spec, std::size_t count,
                                       std::uint64_t seed);

/// Samples, activates, and quantizes with round-half-away-from-zero.
/// Throws RangeError when the target cannot be met: below the activation's
/// exact-zero floor, more than 10% saturation, or so coarse that the 99.9th
/// percentile magnitude quantizes below 2.
QuantTensor generate_synthetic_tensor(const SyntheticSpec& spec, std::vector<std::size_t> dims,
                                      int precision, std::uint64_t seed,
                                      SyntheticInfo* info = nullptr);

/// Stream seed for a derived purpose, stable across platforms.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                          std::uint64_t c = 0);

}  // namespace sbrsim
