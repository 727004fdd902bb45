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
#include <map>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace sbrsim::oracle {

using BigInt = boost::multiprecision::cpp_int;

/// SBR digits (LSB first) by the borrow rule on the 2's-complement bits:
/// split into a signed top slice over (w-1)-bit unsigned fields, then for a
/// negative value borrow one from the next order whenever a field is nonzero.
std::vector<int> sbr_digits_borrow(std::int64_t x, int w, int n);

/// Conventional digits from a bitset of the (w*n)-bit sign-extended pattern.
std::vector<int> conventional_digits_bits(std::int64_t x, int w, int n);

/// Signed top slice over (w-1)-bit unsigned lower slices, read off the bits.
std::vector<int> aligned_digits_bits(std::int64_t x, int w, int n);

struct DigitCounts {
  std::uint64_t digits = 0;
  std::uint64_t zeros = 0;
};

/// Zero-digit count of a tensor from its value histogram and per-value
/// digit tables.
enum class Scheme { Sbr, Conventional, Aligned };
DigitCounts count_zero_digits(const std::vector<std::int64_t>& values, int w, int n, Scheme scheme);

struct Conv {
  int ic = 1, ih = 1, iw = 1, oc = 1, kh = 1, kw = 1, stride = 1, pad = 0;
  int oh() const { return (ih + 2 * pad - kh) / stride + 1; }
  int ow() const { return (iw + 2 * pad - kw) / stride + 1; }
};

/// Unbounded-precision direct convolution, [OC][OH*OW].
std::vector<BigInt> convolve(const Conv& c, const std::vector<std::int64_t>& in,
                             const std::vector<std::int64_t>& wt);

/// Max over consecutive windows of each channel's flattened outputs.
std::vector<BigInt> max_pool(const std::vector<BigInt>& v, int channels, int window);

/// Zero runs before each nonzero sub-word, fillers inserted for runs > 255.
struct Rle {
  std::vector<std::uint32_t> payload;
  std::vector<std::uint8_t> index;
};
Rle rle_reference(const std::vector<std::uint32_t>& words);

/// Sum of P_k * 2^(m k), the exact chain result scaled by 2^(m (n-1)).
BigInt chain_exact_scaled(const std::vector<std::int64_t>& orders, int m);

/// Links of the union of XY routes from `src` to every destination on a
/// cols-wide mesh, found by walking each route hop by hop.
std::size_t multicast_edges(int src, const std::vector<int>& dsts, int cols);

}  // namespace sbrsim::oracle
