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

#include "sbrsim/compression.hpp"

#include <fmt/format.h>

#include <array>
#include <istream>
#include <ostream>
#include <string_view>

#include "sbrsim/error.hpp"

namespace sbrsim {

std::size_t CompressedPlane::trailing_zeros() const {
  std::size_t covered = 0;
  for (auto run : index) covered += static_cast<std::size_t>(run) + 1;
  return total_subwords >= covered ? total_subwords - covered : 0;
}

CompressedPlane rle_compress(std::span<const SubWord> words) {
  CompressedPlane out;
  out.total_subwords = words.size();
  std::size_t run = 0;
  for (SubWord w : words) {
    if (w == 0) {
      ++run;
      continue;
    }
    while (run > kMaxRun) {
      out.payload.push_back(0);
      out.index.push_back(static_cast<std::uint8_t>(kMaxRun));
      run -= kMaxRun + 1;
    }
    out.payload.push_back(w);
    out.index.push_back(static_cast<std::uint8_t>(run));
    run = 0;
  }
  return out;
}

std::vector<SubWord> rle_decompress(const CompressedPlane& plane) {
  if (plane.payload.size() != plane.index.size()) {
    throw FormatError(fmt::format("index has {} entries but payload has {}", plane.index.size(),
                                  plane.payload.size()));
  }
  std::vector<SubWord> words;
  words.reserve(plane.total_subwords);
  for (std::size_t r = 0; r < plane.payload.size(); ++r) {
    words.insert(words.end(), plane.index[r], SubWord{0});
    words.push_back(plane.payload[r]);
    if (words.size() > plane.total_subwords) {
      throw FormatError("compressed plane expands beyond its total sub-word count");
    }
  }
  words.resize(plane.total_subwords, SubWord{0});
  return words;
}

SubWordStream rle_decompress(const CompressedPlane& plane, const SubWordStream& like) {
  SubWordStream s;
  s.digit_width = like.digit_width;
  s.dims = like.dims;
  s.axis = like.axis;
  s.words = rle_decompress(plane);
  return s;
}

std::uint64_t compressed_bits(const CompressedPlane& plane, int subword_width_bits, int index_bits) {
  return static_cast<std::uint64_t>(plane.payload.size()) *
         static_cast<std::uint64_t>(subword_width_bits + index_bits);
}

double compression_ratio(const CompressedPlane& plane, RatioBaseline baseline,
                         const RatioParams& params) {
  const std::uint64_t compressed =
      compressed_bits(plane, params.subword_width_bits, params.index_bits);
  if (compressed == 0) return kInfiniteRatio;
  const std::uint64_t reference =
      baseline == RatioBaseline::Raw16
          ? static_cast<std::uint64_t>(plane.total_subwords) * params.subword_width_bits
          : params.original_bits;
  return static_cast<double>(reference) / static_cast<double>(compressed);
}

std::uint64_t TensorCompression::bits_with_flags(const std::vector<bool>& flags) const {
  if (flags.size() != planes.size()) throw GeometryError("one compress flag per plane required");
  std::uint64_t total = 0;
  for (std::size_t p = 0; p < planes.size(); ++p) {
    total += flags[p] ? compressed_bits[p] : raw_bits[p];
  }
  return total;
}

std::uint64_t TensorCompression::all_on_bits() const {
  return bits_with_flags(std::vector<bool>(planes.size(), true));
}

std::uint64_t TensorCompression::all_off_bits() const {
  return bits_with_flags(std::vector<bool>(planes.size(), false));
}

double TensorCompression::ratio_vs_original(const std::vector<bool>& flags) const {
  const std::uint64_t bits = bits_with_flags(flags);
  return bits == 0 ? kInfiniteRatio : static_cast<double>(original_bits) / static_cast<double>(bits);
}

TensorCompression compress_tensor(const SliceTensor& slices, PackAxis axis) {
  TensorCompression tc;
  const int sw_bits = subword_bits(slices.config().width());
  tc.original_bits = static_cast<std::uint64_t>(slices.config().precision()) * slices.size();
  for (int p = 0; p < slices.plane_count(); ++p) {
    const SubWordStream stream =
        pack_subwords(slices.plane(p), slices.dims(), axis, slices.config().width());
    CompressedPlane plane = rle_compress(stream);
    tc.raw_bits.push_back(static_cast<std::uint64_t>(stream.words.size()) * sw_bits);
    tc.compressed_bits.push_back(compressed_bits(plane, sw_bits));
    tc.planes.push_back(std::move(plane));
  }
  return tc;
}

bool compression_pays_off(std::uint64_t subwords, std::uint64_t records, int subword_width_bits,
                          int index_bits) {
  return records * static_cast<std::uint64_t>(subword_width_bits + index_bits) <
         subwords * static_cast<std::uint64_t>(subword_width_bits);
}

DsmDecision dsm_decide(const SparsityStats& input_stats, const SparsityStats& weight_stats,
                       const DsmPolicy& policy) {
  DsmDecision d;
  d.input_planes = input_stats.plane_count();
  d.weight_planes = weight_stats.plane_count();
  d.input_zero_fraction = input_stats.per_plane_zero_subword_fraction;
  d.weight_zero_fraction = weight_stats.per_plane_zero_subword_fraction;

  auto flags = [&](const SparsityStats& s) {
    std::vector<bool> out(s.plane_count());
    const int sw = subword_bits(s.digit_width);
    for (int p = 0; p < s.plane_count(); ++p) {
      out[p] = compression_pays_off(s.per_plane_subwords[p], s.per_plane_rle_records[p], sw,
                                    policy.index_bits);
    }
    return out;
  };
  d.input_compress = flags(input_stats);
  d.weight_compress = flags(weight_stats);

  d.skip.resize(static_cast<std::size_t>(d.input_planes) * d.weight_planes);
  for (int i = 0; i < d.input_planes; ++i) {
    for (int j = 0; j < d.weight_planes; ++j) {
      const double zi = d.input_zero_fraction[i];
      const double zw = d.weight_zero_fraction[j];
      SkipOperand op = zw > zi ? SkipOperand::Weight : SkipOperand::Input;
      if (zi < policy.min_skip_fraction && zw < policy.min_skip_fraction) op = SkipOperand::None;
      d.skip[static_cast<std::size_t>(i) * d.weight_planes + j] = op;
    }
  }
  return d;
}

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                              static_cast<char>((v >> 16) & 0xFF),
                              static_cast<char>((v >> 24) & 0xFF)};
  out.write(b.data(), b.size());
}

std::uint32_t get_u32(std::istream& in) {
  std::array<unsigned char, 4> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), b.size())) {
    throw FormatError("truncated SBC1 stream");
  }
  return b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void write_sbc1(std::ostream& out, const CompressedPlane& plane) {
  if (plane.payload.size() != plane.index.size()) {
    throw FormatError("index/payload length mismatch");
  }
  out.write("SBC1", 4);
  put_u32(out, static_cast<std::uint32_t>(plane.total_subwords));
  put_u32(out, static_cast<std::uint32_t>(plane.payload.size()));
  for (SubWord w : plane.payload) {
    if (w > 0xFFFF) throw RangeError("SBC1 payload holds 16-bit sub-words only");
    const std::array<char, 2> b{static_cast<char>(w & 0xFF), static_cast<char>((w >> 8) & 0xFF)};
    out.write(b.data(), b.size());
  }
  out.write(reinterpret_cast<const char*>(plane.index.data()),
            static_cast<std::streamsize>(plane.index.size()));
  if (!out) throw FormatError("failed writing SBC1 stream");
}

CompressedPlane read_sbc1(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), 4) || std::string_view(magic.data(), 4) != "SBC1") {
    throw FormatError("bad SBC1 magic");
  }
  CompressedPlane plane;
  plane.total_subwords = get_u32(in);
  const std::uint32_t count = get_u32(in);
  if (count > plane.total_subwords) throw FormatError("SBC1 payload larger than total sub-words");
  plane.payload.resize(count);
  for (auto& w : plane.payload) {
    std::array<unsigned char, 2> b{};
    if (!in.read(reinterpret_cast<char*>(b.data()), 2)) throw FormatError("truncated SBC1 payload");
    w = b[0] | (b[1] << 8);
  }
  plane.index.resize(count);
  if (count && !in.read(reinterpret_cast<char*>(plane.index.data()), count)) {
    throw FormatError("truncated SBC1 index");
  }
  // Validates run accounting.
  (void)rle_decompress(plane);
  return plane;
}

}  // namespace sbrsim
