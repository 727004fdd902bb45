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

#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "sbrsim/compression.hpp"
#include "sbrsim/error.hpp"
#include "sbrsim/synthetic.hpp"

namespace sbrsim {
namespace {

constexpr SubWord A = 0x0012, B = 0x3400;

TEST(Rle, ShortRuns) {
  const std::vector<SubWord> s{0, 0, A, 0, B};
  const CompressedPlane c = rle_compress(s);
  EXPECT_EQ(c.payload, (std::vector<SubWord>{A, B}));
  EXPECT_EQ(c.index, (std::vector<std::uint8_t>{2, 1}));
  EXPECT_EQ(c.total_subwords, 5u);
  EXPECT_EQ(rle_decompress(c), s);
}

TEST(Rle, LongRunSplitsWithFiller) {
  std::vector<SubWord> s(300, 0);
  s.push_back(A);
  const CompressedPlane c = rle_compress(s);
  EXPECT_EQ(c.payload, (std::vector<SubWord>{0x0000, A}));
  EXPECT_EQ(c.index, (std::vector<std::uint8_t>{255, 44}));
  EXPECT_EQ(c.total_subwords, 301u);
  EXPECT_EQ(rle_decompress(c), s);
}

TEST(Rle, AllZeroStream) {
  const std::vector<SubWord> s(64, 0);
  const CompressedPlane c = rle_compress(s);
  EXPECT_TRUE(c.payload.empty());
  EXPECT_TRUE(c.index.empty());
  EXPECT_EQ(c.total_subwords, 64u);
  EXPECT_EQ(c.trailing_zeros(), 64u);
  EXPECT_EQ(rle_decompress(c), s);
}

TEST(Rle, MatchesReferenceAndRoundTrips) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const double z = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const std::size_t len = std::uniform_int_distribution<std::size_t>(0, 1200)(rng);
    std::vector<SubWord> s(len);
    for (auto& w : s) {
      w = std::bernoulli_distribution(z)(rng) ? 0 : std::uniform_int_distribution<SubWord>(1, 0xFFFF)(rng);
    }
    const CompressedPlane c = rle_compress(s);
    const oracle::Rle ref = oracle::rle_reference(s);
    ASSERT_EQ(c.payload, ref.payload);
    ASSERT_EQ(c.index, ref.index);
    ASSERT_EQ(rle_decompress(c), s);

    RleRecordCounter counter;
    for (SubWord w : s) counter.push(w != 0);
    ASSERT_EQ(counter.records(), c.records());

    std::stringstream io;
    write_sbc1(io, c);
    ASSERT_EQ(read_sbc1(io), c);
  }
}

TEST(Rle, ForEachRecordWalksPositions) {
  std::vector<SubWord> s(600, 0);
  s[3] = A;
  s[520] = B;
  std::vector<std::size_t> seen;
  for_each_record(rle_compress(s), [&](std::size_t pos, SubWord w) {
    if (w) seen.push_back(pos);
  });
  EXPECT_EQ(seen, (std::vector<std::size_t>{3, 520}));
}

TEST(Sbc1, RejectsBadMagicAndTruncation) {
  std::stringstream bad("SBC2\0\0\0\0\0\0\0\0");
  EXPECT_THROW(read_sbc1(bad), FormatError);
  std::stringstream io;
  write_sbc1(io, rle_compress(std::vector<SubWord>{0, A}));
  std::string bytes = io.str();
  EXPECT_EQ(bytes.substr(0, 4), "SBC1");
  EXPECT_EQ(bytes.size(), 4u + 4 + 4 + 2 + 1);
  bytes.pop_back();
  std::stringstream cut(bytes);
  EXPECT_THROW(read_sbc1(cut), FormatError);
}

TEST(CompressionRatio, Raw16) {
  std::vector<SubWord> s(8, 0);
  s[1] = A;
  s[6] = B;
  EXPECT_NEAR(compression_ratio(rle_compress(s), RatioBaseline::Raw16), 128.0 / 48.0, 1e-12);
  const std::vector<SubWord> dense(8, A);
  EXPECT_NEAR(compression_ratio(rle_compress(dense), RatioBaseline::Raw16), 16.0 / 24.0, 1e-12);
  EXPECT_EQ(compression_ratio(rle_compress(std::vector<SubWord>(8, 0)), RatioBaseline::Raw16),
            kInfiniteRatio);
}

SparsityStats fake_stats(double zero_subwords) {
  SparsityStats s;
  s.per_plane_zero_fraction = {zero_subwords};
  s.per_plane_zero_subword_fraction = {zero_subwords};
  s.per_plane_subwords = {1000};
  s.per_plane_rle_records = {static_cast<std::uint64_t>(1000 * (1.0 - zero_subwords) + 0.5)};
  s.per_plane_zero_subwords = {1000 - s.per_plane_rle_records[0]};
  s.per_plane_zero_digits = {0};
  return s;
}

TEST(Dsm, ThresholdsAndOperandChoice) {
  DsmDecision d = dsm_decide(fake_stats(0.8), fake_stats(0.0));
  EXPECT_TRUE(d.input_compress[0]);
  EXPECT_EQ(d.skip_operand(0, 0), SkipOperand::Input);

  d = dsm_decide(fake_stats(0.1), fake_stats(0.5));
  EXPECT_EQ(d.skip_operand(0, 0), SkipOperand::Weight);

  d = dsm_decide(fake_stats(0.02), fake_stats(0.02));
  EXPECT_EQ(d.skip_operand(0, 0), SkipOperand::None);
  EXPECT_FALSE(d.input_compress[0]);
  EXPECT_FALSE(d.weight_compress[0]);
}

TEST(Dsm, CompressionBreakEven) {
  // 16-bit sub-word against 24 bits per record.
  EXPECT_TRUE(compression_pays_off(300, 199, 16));
  EXPECT_FALSE(compression_pays_off(300, 200, 16));
}

TEST(TensorCompression, HybridNeverWorseThanUniform) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    SyntheticSpec spec;
    spec.activation = seed % 2 ? Activation::Relu : Activation::LeakyRelu;
    spec.target_zero_fraction = seed % 2 ? 0.55 + 0.02 * static_cast<double>(seed) : 0.2 + 0.05 * static_cast<double>(seed);
    const QuantTensor t = generate_synthetic_tensor(spec, {8, 12, 12}, 10, seed);
    const SliceTensor s = encode_sbr(t, SliceConfig::for_precision(4, 10));
    const TensorCompression c = compress_tensor(s, PackAxis::Innermost);
    const DsmDecision d = dsm_decide(sparsity_stats(s), sparsity_stats(s));
    const std::uint64_t hybrid = c.bits_with_flags(d.input_compress);
    EXPECT_LE(hybrid, c.all_on_bits());
    EXPECT_LE(hybrid, c.all_off_bits());
    for (std::size_t p = 0; p < c.planes.size(); ++p) {
      if (d.input_compress[p]) {
        EXPECT_GE(compression_ratio(c.planes[p], RatioBaseline::Raw16), 1.0);
      }
    }
  }
}

}  // namespace
}  // namespace sbrsim
