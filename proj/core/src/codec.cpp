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

#include "sbrsim/codec.hpp"

#include <fmt/format.h>

#include <cstdlib>
#include <functional>
#include <numeric>

#include "sbrsim/error.hpp"

namespace sbrsim {

SliceConfig::SliceConfig(int width, int slices) : width_(width), slices_(slices) {
  if (width < kMinWidth || width > kMaxWidth) {
    throw RangeError(fmt::format("slice width {} outside [{}, {}]", width, kMinWidth, kMaxWidth));
  }
  if (slices < 1 || precision() > kMaxPrecision) {
    throw RangeError(fmt::format("slice count {} invalid for width {}", slices, width));
  }
}

SliceConfig SliceConfig::for_precision(int width, int precision) {
  if (width < kMinWidth || width > kMaxWidth) {
    throw RangeError(fmt::format("slice width {} outside [{}, {}]", width, kMinWidth, kMaxWidth));
  }
  const int m = width - 1;
  if (precision < width || (precision - 1) % m != 0) {
    throw RangeError(
        fmt::format("precision {} is not representable with {}-bit signed slices", precision, width));
  }
  return SliceConfig(width, (precision - 1) / m);
}

std::size_t element_count(std::span<const std::size_t> dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

std::int64_t precision_min(int precision) { return -(std::int64_t{1} << (precision - 1)); }
std::int64_t precision_max(int precision) { return (std::int64_t{1} << (precision - 1)) - 1; }

bool fits_precision(std::int64_t value, int precision) {
  return value >= precision_min(precision) && value <= precision_max(precision);
}

QuantTensor::QuantTensor(std::vector<std::size_t> dims, int precision,
                         std::vector<std::int64_t> values)
    : dims_(std::move(dims)), precision_(precision), values_(std::move(values)) {
  if (precision_ < 1 || precision_ > kMaxPrecision) {
    throw RangeError(fmt::format("tensor precision {} outside [1, {}]", precision_, kMaxPrecision));
  }
  if (element_count(dims_) != values_.size()) {
    throw GeometryError(fmt::format("tensor has {} values but dims describe {}", values_.size(),
                                    element_count(dims_)));
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!fits_precision(values_[i], precision_)) {
      throw RangeError(fmt::format("value {} at index {} does not fit {}-bit precision",
                                   values_[i], i, precision_));
    }
  }
}

QuantTensor QuantTensor::zeros(std::vector<std::size_t> dims, int precision) {
  const std::size_t n = element_count(dims);
  return QuantTensor(std::move(dims), precision, std::vector<std::int64_t>(n, 0));
}

std::int64_t QuantTensor::min_representable() const { return precision_min(precision_); }
std::int64_t QuantTensor::max_representable() const { return precision_max(precision_); }

std::string_view to_string(Encoding encoding) {
  switch (encoding) {
    case Encoding::Sbr: return "sbr";
    case Encoding::Conventional: return "conventional";
    case Encoding::ConventionalAligned: return "conventional_aligned";
  }
  return "?";
}

SliceTensor::SliceTensor(SliceConfig config, Encoding encoding, std::vector<std::size_t> dims,
                         std::vector<std::vector<std::int8_t>> planes)
    : config_(config),
      encoding_(encoding),
      dims_(std::move(dims)),
      size_(element_count(dims_)),
      planes_(std::move(planes)) {
  if (static_cast<int>(planes_.size()) != config_.slices()) {
    throw GeometryError(
        fmt::format("expected {} planes, got {}", config_.slices(), planes_.size()));
  }
  for (const auto& p : planes_) {
    if (p.size() != size_) throw GeometryError("digit plane size does not match tensor dims");
  }
}

std::int64_t SliceTensor::radix() const {
  return encoding_ == Encoding::Conventional ? std::int64_t{1} << config_.width() : config_.base();
}

void sbr_digits(std::int64_t value, const SliceConfig& config, std::span<std::int8_t> out) {
  const int n = config.slices();
  const std::int64_t base = config.base();
  if (value == precision_min(config.precision())) {
    std::fill(out.begin(), out.begin() + n, std::int8_t{0});
    out[n - 1] = static_cast<std::int8_t>(-base);
    return;
  }
  const bool negative = value < 0;
  std::int64_t mag = negative ? -value : value;
  for (int i = 0; i < n; ++i) {
    const auto d = static_cast<std::int8_t>(mag % base);
    out[i] = negative ? static_cast<std::int8_t>(-d) : d;
    mag /= base;
  }
}

void conventional_digits(std::int64_t value, const SliceConfig& config, std::span<std::int8_t> out) {
  const int n = config.slices();
  const int w = config.width();
  const std::uint64_t mask = (std::uint64_t{1} << w) - 1;
  const auto bits = static_cast<std::uint64_t>(value);  // two's complement, sign-extended
  for (int i = 0; i < n - 1; ++i) {
    out[i] = static_cast<std::int8_t>((bits >> (w * i)) & mask);
  }
  // Arithmetic shift keeps the sign of the top group.
  out[n - 1] = static_cast<std::int8_t>(value >> (w * (n - 1)));
}

void conventional_aligned_digits(std::int64_t value, const SliceConfig& config,
                                 std::span<std::int8_t> out) {
  const int n = config.slices();
  const int m = config.magnitude_bits();
  const std::uint64_t mask = (std::uint64_t{1} << m) - 1;
  const auto bits = static_cast<std::uint64_t>(value);
  for (int i = 0; i < n - 1; ++i) {
    out[i] = static_cast<std::int8_t>((bits >> (m * i)) & mask);
  }
  out[n - 1] = static_cast<std::int8_t>(value >> (m * (n - 1)));
}

namespace {

void check_precision(const QuantTensor& tensor, const SliceConfig& config) {
  if (tensor.precision() != config.precision()) {
    throw RangeError(fmt::format("tensor precision {} does not match slice config precision {}",
                                 tensor.precision(), config.precision()));
  }
}

template <typename DigitFn>
SliceTensor encode_with(const QuantTensor& tensor, const SliceConfig& config, Encoding kind,
                        DigitFn&& digits) {
  check_precision(tensor, config);
  const int n = config.slices();
  std::vector<std::vector<std::int8_t>> planes(n, std::vector<std::int8_t>(tensor.size()));
  std::vector<std::int8_t> scratch(n);
  for (std::size_t e = 0; e < tensor.size(); ++e) {
    const std::int64_t x = tensor[e];
    if (!fits_precision(x, config.precision())) {
      throw RangeError(fmt::format("value {} does not fit {}-bit precision", x, config.precision()));
    }
    digits(x, config, std::span<std::int8_t>(scratch));
    for (int i = 0; i < n; ++i) planes[i][e] = scratch[i];
  }
  return SliceTensor(config, kind, tensor.dims(), std::move(planes));
}

}  // namespace

SliceTensor encode_sbr(const QuantTensor& tensor, const SliceConfig& config) {
  return encode_with(tensor, config, Encoding::Sbr, sbr_digits);
}

SliceTensor encode_conventional(const QuantTensor& tensor, const SliceConfig& config) {
  return encode_with(tensor, config, Encoding::Conventional, conventional_digits);
}

SliceTensor encode_conventional_aligned(const QuantTensor& tensor, const SliceConfig& config) {
  return encode_with(tensor, config, Encoding::ConventionalAligned, conventional_aligned_digits);
}

SliceTensor encode(const QuantTensor& tensor, const SliceConfig& config, Encoding encoding) {
  switch (encoding) {
    case Encoding::Sbr: return encode_sbr(tensor, config);
    case Encoding::Conventional: return encode_conventional(tensor, config);
    case Encoding::ConventionalAligned: return encode_conventional_aligned(tensor, config);
  }
  throw Error("unknown encoding");
}

QuantTensor decode_sbr(const SliceTensor& slices) {
  if (slices.encoding() != Encoding::Sbr) {
    throw Error("decode_sbr requires an SBR-encoded slice tensor");
  }
  const SliceConfig& cfg = slices.config();
  const int n = cfg.slices();
  const std::int64_t base = cfg.base();
  std::vector<std::int64_t> values(slices.size());
  for (std::size_t e = 0; e < slices.size(); ++e) {
    std::int64_t acc = 0;
    int sign = 0;
    for (int i = n - 1; i >= 0; --i) {
      const int d = slices.plane(i)[e];
      const bool top = i == n - 1;
      if (d > base - 1 || d < (top ? -base : -(base - 1))) {
        throw RangeError(fmt::format("digit {} out of range at order {} element {}", d, i, e));
      }
      if (d != 0) {
        const int s = d < 0 ? -1 : 1;
        if (sign != 0 && s != sign) {
          throw RangeError(fmt::format("mixed digit signs in element {}", e));
        }
        sign = s;
      }
      acc = acc * base + d;
    }
    if (!fits_precision(acc, cfg.precision())) {
      throw RangeError(fmt::format("reconstructed value {} exceeds {}-bit precision", acc,
                                   cfg.precision()));
    }
    values[e] = acc;
  }
  return QuantTensor(slices.dims(), cfg.precision(), std::move(values));
}

QuantTensor decode_slices(const SliceTensor& slices) {
  if (slices.encoding() == Encoding::Sbr) return decode_sbr(slices);
  const int n = slices.config().slices();
  const std::int64_t radix = slices.radix();
  std::vector<std::int64_t> values(slices.size());
  for (std::size_t e = 0; e < slices.size(); ++e) {
    std::int64_t acc = 0;
    for (int i = n - 1; i >= 0; --i) acc = acc * radix + slices.plane(i)[e];
    values[e] = acc;
  }
  return QuantTensor(slices.dims(), slices.config().precision(), std::move(values));
}

}  // namespace sbrsim
