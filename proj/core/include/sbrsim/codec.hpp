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
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace sbrsim {

/// Geometry of a signed bit-slice: `width` bits per slice (one of them a
/// sign bit), `slices` slices per value. A value of precision
/// p = (width - 1) * slices + 1 decomposes into base-2^(width-1) digits.
class SliceConfig {
 public:
  static constexpr int kMinWidth = 3;
  static constexpr int kMaxWidth = 5;
  static constexpr int kMaxPrecision = 31;

  SliceConfig() = default;
  SliceConfig(int width, int slices);

  /// Rejects any (width, precision) pair that is not on the
  /// p = (w-1)*n + 1 grid.
  static SliceConfig for_precision(int width, int precision);

  int width() const { return width_; }
  int slices() const { return slices_; }
  int magnitude_bits() const { return width_ - 1; }
  std::int64_t base() const { return std::int64_t{1} << (width_ - 1); }
  int precision() const { return (width_ - 1) * slices_ + 1; }

  /// Smallest and largest digit a signed w-bit slice may hold.
  int digit_min() const { return -(1 << (width_ - 1)); }
  int digit_max() const { return (1 << (width_ - 1)) - 1; }

  friend bool operator==(const SliceConfig&, const SliceConfig&) = default;

 private:
  int width_ = 4;
  int slices_ = 2;
};

/// Integer tensor with a declared two's-complement precision. Values are
/// validated against [-2^(p-1), 2^(p-1)-1] on construction.
class QuantTensor {
 public:
  static constexpr int kMaxPrecision = 63;

  QuantTensor() = default;
  QuantTensor(std::vector<std::size_t> dims, int precision, std::vector<std::int64_t> values);

  static QuantTensor zeros(std::vector<std::size_t> dims, int precision);

  const std::vector<std::size_t>& dims() const { return dims_; }
  int precision() const { return precision_; }
  std::span<const std::int64_t> values() const { return values_; }
  std::int64_t operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }

  std::int64_t min_representable() const;
  std::int64_t max_representable() const;

  friend bool operator==(const QuantTensor&, const QuantTensor&) = default;

 private:
  std::vector<std::size_t> dims_;
  int precision_ = 8;
  std::vector<std::int64_t> values_;
};

std::size_t element_count(std::span<const std::size_t> dims);
std::int64_t precision_min(int precision);
std::int64_t precision_max(int precision);
bool fits_precision(std::int64_t value, int precision);

enum class Encoding {
  Sbr,                  ///< signed bit-slices, sign applied to every digit
  Conventional,         ///< w-bit groups of the (w*n)-bit sign-extended pattern
  ConventionalAligned,  ///< signed MSB slice over (w-1)-bit unsigned lower slices
};

std::string_view to_string(Encoding encoding);

/// Per-order digit planes of a tensor. Plane 0 holds the least significant
/// digits, plane n-1 the most significant ("M") digits.
class SliceTensor {
 public:
  SliceTensor(SliceConfig config, Encoding encoding, std::vector<std::size_t> dims,
              std::vector<std::vector<std::int8_t>> planes);

  const SliceConfig& config() const { return config_; }
  Encoding encoding() const { return encoding_; }
  const std::vector<std::size_t>& dims() const { return dims_; }
  std::size_t size() const { return size_; }
  int plane_count() const { return static_cast<int>(planes_.size()); }
  std::span<const std::int8_t> plane(int order) const { return planes_.at(order); }

  /// Radix between adjacent planes: 2^(w-1), or 2^w for Conventional.
  std::int64_t radix() const;

 private:
  SliceConfig config_;
  Encoding encoding_;
  std::vector<std::size_t> dims_;
  std::size_t size_ = 0;
  std::vector<std::vector<std::int8_t>> planes_;
};

/// Sign-magnitude base-B digits of one value; the most negative value
/// becomes digit_{n-1} = -B with all lower digits zero.
void sbr_digits(std::int64_t value, const SliceConfig& config, std::span<std::int8_t> out);
void conventional_digits(std::int64_t value, const SliceConfig& config, std::span<std::int8_t> out);
void conventional_aligned_digits(std::int64_t value, const SliceConfig& config,
                                 std::span<std::int8_t> out);

SliceTensor encode_sbr(const QuantTensor& tensor, const SliceConfig& config);
QuantTensor decode_sbr(const SliceTensor& slices);
SliceTensor encode_conventional(const QuantTensor& tensor, const SliceConfig& config);
SliceTensor encode_conventional_aligned(const QuantTensor& tensor, const SliceConfig& config);
SliceTensor encode(const QuantTensor& tensor, const SliceConfig& config, Encoding encoding);

/// Reconstructs values for any encoding kind (Σ digit_i · radix^i).
QuantTensor decode_slices(const SliceTensor& slices);

}  // namespace sbrsim
