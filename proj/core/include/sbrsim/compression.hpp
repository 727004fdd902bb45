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
#include <iosfwd>
#include <limits>
#include <span>
#include <vector>

#include "sbrsim/subword.hpp"

namespace sbrsim {

inline constexpr int kIndexBits = 8;
inline constexpr std::size_t kMaxRun = 255;

/// RLE form of a sub-word stream: `payload` is the IBUF content, `index`
/// the IDXBUF content (zero-run length preceding each payload entry).
/// Runs longer than 255 are split by an explicit zero filler with run 255.
/// Zeros after the last payload entry are implied by `total_subwords`.
struct CompressedPlane {
  std::vector<SubWord> payload;
  std::vector<std::uint8_t> index;
  std::size_t total_subwords = 0;

  std::size_t records() const { return payload.size(); }
  std::size_t trailing_zeros() const;

  friend bool operator==(const CompressedPlane&, const CompressedPlane&) = default;
};

/// Streaming counterpart of rle_compress that only counts records.
class RleRecordCounter {
 public:
  void push(bool nonzero) {
    if (!nonzero) {
      ++run_;
      return;
    }
    records_ += run_ / (kMaxRun + 1) + 1;
    run_ = 0;
  }
  std::uint64_t records() const { return records_; }

 private:
  std::uint64_t run_ = 0;
  std::uint64_t records_ = 0;
};

CompressedPlane rle_compress(std::span<const SubWord> words);
inline CompressedPlane rle_compress(const SubWordStream& stream) { return rle_compress(stream.words); }
std::vector<SubWord> rle_decompress(const CompressedPlane& plane);

/// Decompresses into a stream with the shape of `like`.
SubWordStream rle_decompress(const CompressedPlane& plane, const SubWordStream& like);

/// Calls fn(position, word) for every payload entry, where `position` is the
/// entry's offset in the uncompressed stream. This is the address walk the
/// zero skipping unit performs with the IDXBUF.
template <typename Fn>
void for_each_record(const CompressedPlane& plane, Fn&& fn) {
  std::size_t pos = 0;
  for (std::size_t r = 0; r < plane.payload.size(); ++r) {
    pos += plane.index[r];
    fn(pos, plane.payload[r]);
    ++pos;
  }
}

std::uint64_t compressed_bits(const CompressedPlane& plane, int subword_width_bits,
                              int index_bits = kIndexBits);

enum class RatioBaseline {
  Raw16,               ///< uncompressed sub-word stream
  OriginalFixedPoint,  ///< p bits per source element
};

struct RatioParams {
  int subword_width_bits = 16;
  int index_bits = kIndexBits;
  std::uint64_t original_bits = 0;  ///< required for OriginalFixedPoint
};

/// Baseline bits over compressed bits; +infinity when the payload is empty.
double compression_ratio(const CompressedPlane& plane, RatioBaseline baseline,
                         const RatioParams& params = {});

inline constexpr double kInfiniteRatio = std::numeric_limits<double>::infinity();

/// Per-plane compression of a whole slice tensor with DSM-style flags.
struct TensorCompression {
  std::vector<CompressedPlane> planes;
  std::vector<std::uint64_t> raw_bits;         ///< per plane, uncompressed
  std::vector<std::uint64_t> compressed_bits;  ///< per plane, RLE
  std::uint64_t original_bits = 0;             ///< p * elements

  std::uint64_t bits_with_flags(const std::vector<bool>& flags) const;
  std::uint64_t all_on_bits() const;
  std::uint64_t all_off_bits() const;
  double ratio_vs_original(const std::vector<bool>& flags) const;
};

TensorCompression compress_tensor(const SliceTensor& slices, PackAxis axis);

enum class SkipOperand { None, Input, Weight };

struct DsmPolicy {
  /// Below this zero-sub-word fraction on both operands, skipping is disabled.
  double min_skip_fraction = 0.05;
  int index_bits = kIndexBits;
};

/// Skip/compress decisions for one layer, made before execution.
struct DsmDecision {
  int input_planes = 0;
  int weight_planes = 0;
  std::vector<double> input_zero_fraction;   ///< zero-sub-word fraction per plane
  std::vector<double> weight_zero_fraction;
  std::vector<bool> input_compress;
  std::vector<bool> weight_compress;
  std::vector<SkipOperand> skip;  ///< row-major [input order][weight order]

  SkipOperand skip_operand(int input_order, int weight_order) const {
    return skip.at(static_cast<std::size_t>(input_order) * weight_planes + weight_order);
  }
};

DsmDecision dsm_decide(const SparsityStats& input_stats, const SparsityStats& weight_stats,
                       const DsmPolicy& policy = {});

/// True when RLE of a plane with these counts beats the raw stream.
bool compression_pays_off(std::uint64_t subwords, std::uint64_t records, int subword_width_bits,
                          int index_bits = kIndexBits);

// SBC1 serialization: magic "SBC1", u32 total_subwords, u32 payload_count,
// u16[payload_count] payload, u8[payload_count] index. Little-endian.
void write_sbc1(std::ostream& out, const CompressedPlane& plane);
CompressedPlane read_sbc1(std::istream& in);

}  // namespace sbrsim
