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

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sbrsim/codec.hpp"

namespace sbrsim {

/// Four w-bit digits packed little-endian: digit j occupies bits [w*j+w-1 : w*j].
using SubWord = std::uint32_t;
inline constexpr int kSubwordDigits = 4;

/// Axis along which four consecutive digits form one sub-word.
enum class PackAxis {
  Innermost,  ///< last dimension (W of an activation [C, H, W])
  Outermost,  ///< first dimension (OC of a weight [OC, IC, KH, KW])
};

std::size_t axis_index(PackAxis axis, std::size_t ndims);

constexpr int subword_bits(int digit_width) { return digit_width * kSubwordDigits; }

SubWord pack_digits(std::span<const std::int8_t, kSubwordDigits> digits, int width);
std::array<std::int8_t, kSubwordDigits> unpack_digits(SubWord word, int width);

/// Sign-extends the w-bit field at lane `lane` of a packed sub-word.
inline int subword_lane(SubWord word, int lane, int width) {
  const std::uint32_t field = (word >> (width * lane)) & ((1u << width) - 1u);
  const std::uint32_t sign = 1u << (width - 1);
  return static_cast<int>(field ^ sign) - static_cast<int>(sign);
}

struct SubWordStream {
  int digit_width = 4;
  std::vector<std::size_t> dims;  ///< shape of the unpacked digit plane
  PackAxis axis = PackAxis::Innermost;
  std::vector<SubWord> words;

  std::size_t group_count() const { return words.size(); }
};

/// Number of sub-words a plane of the given shape packs into.
std::size_t subword_count(std::span<const std::size_t> dims, PackAxis axis);

/// Packs a digit plane into sub-words along `axis`; each line along the axis
/// is split into groups of four with the tail padded by zero digits.
SubWordStream pack_subwords(std::span<const std::int8_t> plane, std::span<const std::size_t> dims,
                            PackAxis axis, int width);
std::vector<std::int8_t> unpack_subwords(const SubWordStream& stream);

/// Calls fn(line_base, stride, length) once per line along `axis`,
/// in the same order pack_subwords emits them.
template <typename Fn>
void for_each_line(std::span<const std::size_t> dims, PackAxis axis, Fn&& fn) {
  if (dims.empty()) {
    fn(std::size_t{0}, std::size_t{1}, std::size_t{1});
    return;
  }
  const std::size_t a = axis_index(axis, dims.size());
  std::size_t outer = 1, inner = 1;
  for (std::size_t d = 0; d < a; ++d) outer *= dims[d];
  for (std::size_t d = a + 1; d < dims.size(); ++d) inner *= dims[d];
  const std::size_t len = dims[a];
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t i = 0; i < inner; ++i) fn(o * len * inner + i, inner, len);
  }
}

struct SparsityStats {
  int digit_width = 4;
  std::size_t elements = 0;
  std::vector<double> per_plane_zero_fraction;
  double total_zero_fraction = 0.0;
  double zero_subword_fraction = 0.0;
  double element_zero_fraction = 0.0;

  // Sub-word level detail, one entry per plane.
  std::vector<double> per_plane_zero_subword_fraction;
  std::vector<std::uint64_t> per_plane_zero_digits;
  std::vector<std::uint64_t> per_plane_subwords;
  std::vector<std::uint64_t> per_plane_zero_subwords;
  /// RLE records the plane would compress to, overflow fillers included.
  std::vector<std::uint64_t> per_plane_rle_records;

  int plane_count() const { return static_cast<int>(per_plane_zero_fraction.size()); }
};

SparsityStats sparsity_stats(const SliceTensor& slices, PackAxis axis = PackAxis::Innermost);

}  // namespace sbrsim
