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

#include "sbrsim/subword.hpp"

#include <fmt/format.h>

#include "sbrsim/compression.hpp"
#include "sbrsim/error.hpp"

namespace sbrsim {

std::size_t axis_index(PackAxis axis, std::size_t ndims) {
  if (ndims == 0) return 0;
  return axis == PackAxis::Innermost ? ndims - 1 : 0;
}

SubWord pack_digits(std::span<const std::int8_t, kSubwordDigits> digits, int width) {
  const int lo = -(1 << (width - 1));
  const int hi = (1 << (width - 1)) - 1;
  const std::uint32_t mask = (1u << width) - 1u;
  SubWord word = 0;
  for (int j = 0; j < kSubwordDigits; ++j) {
    const int d = digits[j];
    if (d < lo || d > hi) {
      throw RangeError(fmt::format("digit {} does not fit a {}-bit signed field", d, width));
    }
    word |= (static_cast<std::uint32_t>(d) & mask) << (width * j);
  }
  return word;
}

std::array<std::int8_t, kSubwordDigits> unpack_digits(SubWord word, int width) {
  std::array<std::int8_t, kSubwordDigits> out{};
  for (int j = 0; j < kSubwordDigits; ++j) {
    out[j] = static_cast<std::int8_t>(subword_lane(word, j, width));
  }
  return out;
}

std::size_t subword_count(std::span<const std::size_t> dims, PackAxis axis) {
  std::size_t total = 0;
  for_each_line(dims, axis, [&](std::size_t, std::size_t, std::size_t len) {
    total += (len + kSubwordDigits - 1) / kSubwordDigits;
  });
  return total;
}

SubWordStream pack_subwords(std::span<const std::int8_t> plane, std::span<const std::size_t> dims,
                            PackAxis axis, int width) {
  if (plane.size() != element_count(dims)) {
    throw GeometryError("digit plane size does not match dims");
  }
  SubWordStream stream;
  stream.digit_width = width;
  stream.dims.assign(dims.begin(), dims.end());
  stream.axis = axis;
  stream.words.reserve(subword_count(dims, axis));
  for_each_line(dims, axis, [&](std::size_t base, std::size_t stride, std::size_t len) {
    for (std::size_t g = 0; g < len; g += kSubwordDigits) {
      std::array<std::int8_t, kSubwordDigits> digits{};
      for (std::size_t j = 0; j < kSubwordDigits && g + j < len; ++j) {
        digits[j] = plane[base + (g + j) * stride];
      }
      stream.words.push_back(pack_digits(digits, width));
    }
  });
  return stream;
}

std::vector<std::int8_t> unpack_subwords(const SubWordStream& stream) {
  const std::size_t expected = subword_count(stream.dims, stream.axis);
  if (stream.words.size() != expected) {
    throw FormatError(fmt::format("sub-word stream holds {} words, shape requires {}",
                                  stream.words.size(), expected));
  }
  std::vector<std::int8_t> plane(element_count(stream.dims));
  std::size_t w = 0;
  for_each_line(stream.dims, stream.axis, [&](std::size_t base, std::size_t stride, std::size_t len) {
    for (std::size_t g = 0; g < len; g += kSubwordDigits) {
      const auto digits = unpack_digits(stream.words[w++], stream.digit_width);
      for (std::size_t j = 0; j < kSubwordDigits; ++j) {
        if (g + j < len) {
          plane[base + (g + j) * stride] = digits[j];
        } else if (digits[j] != 0) {
          throw FormatError("non-zero digit in sub-word tail padding");
        }
      }
    }
  });
  return plane;
}

SparsityStats sparsity_stats(const SliceTensor& slices, PackAxis axis) {
  SparsityStats s;
  const int n = slices.plane_count();
  const std::size_t count = slices.size();
  s.digit_width = slices.config().width();
  s.elements = count;
  s.per_plane_zero_fraction.resize(n);
  s.per_plane_zero_subword_fraction.resize(n);
  s.per_plane_zero_digits.resize(n);
  s.per_plane_subwords.resize(n);
  s.per_plane_zero_subwords.resize(n);
  s.per_plane_rle_records.resize(n);

  std::uint64_t zero_digits = 0, subwords = 0, zero_subwords = 0;
  for (int p = 0; p < n; ++p) {
    const auto plane = slices.plane(p);
    std::uint64_t zeros = 0;
    for (auto d : plane) zeros += d == 0;

    // Group along the packing axis; a run of zero groups feeds the RLE
    // record estimate without materialising the packed stream.
    std::uint64_t groups = 0, zero_groups = 0;
    RleRecordCounter records;
    for_each_line(slices.dims(), axis, [&](std::size_t base, std::size_t stride, std::size_t len) {
      for (std::size_t g = 0; g < len; g += kSubwordDigits) {
        bool all_zero = true;
        for (std::size_t j = 0; j < kSubwordDigits && g + j < len; ++j) {
          all_zero = all_zero && plane[base + (g + j) * stride] == 0;
        }
        ++groups;
        zero_groups += all_zero;
        records.push(!all_zero);
      }
    });

    s.per_plane_zero_digits[p] = zeros;
    s.per_plane_zero_fraction[p] = count ? static_cast<double>(zeros) / count : 1.0;
    s.per_plane_subwords[p] = groups;
    s.per_plane_zero_subwords[p] = zero_groups;
    s.per_plane_zero_subword_fraction[p] =
        groups ? static_cast<double>(zero_groups) / groups : 1.0;
    s.per_plane_rle_records[p] = records.records();
    zero_digits += zeros;
    subwords += groups;
    zero_subwords += zero_groups;
  }
  s.total_zero_fraction =
      count ? static_cast<double>(zero_digits) / (static_cast<double>(count) * n) : 1.0;
  s.zero_subword_fraction = subwords ? static_cast<double>(zero_subwords) / subwords : 1.0;

  std::uint64_t zero_elements = 0;
  for (std::size_t e = 0; e < count; ++e) {
    bool all_zero = true;
    for (int p = 0; p < n && all_zero; ++p) all_zero = slices.plane(p)[e] == 0;
    zero_elements += all_zero;
  }
  s.element_zero_fraction = count ? static_cast<double>(zero_elements) / count : 1.0;
  return s;
}

}  // namespace sbrsim
