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

#include "random_layer.hpp"
#include "sbrsim/error.hpp"
#include "sbrsim/pe.hpp"

namespace sbrsim {
namespace {

TEST(SignedMac, Products) {
  EXPECT_EQ(signed_mac_product(-8, 7), -56);
  EXPECT_EQ(signed_mac_product(-8, -8), 64);
  EXPECT_EQ(signed_mac_product(-3, -1), 3);
  EXPECT_THROW(signed_mac_product(8, 1), RangeError);
}

TEST(AccumulateWrap, TwelveBitBoundary) {
  EXPECT_EQ(accumulate_wrap(2047, 1).value, -2048);
  EXPECT_TRUE(accumulate_wrap(2047, 1).wrapped);
  EXPECT_EQ(accumulate_wrap(2040, 100).value, -1956);
  EXPECT_EQ(accumulate_wrap(0, -56).value, -56);
  EXPECT_FALSE(accumulate_wrap(0, -56).wrapped);
}

TEST(Schedule, GroupAndArrayTotals) {
  PEConfig cfg;
  const std::vector<std::uint64_t> single{10};
  EXPECT_EQ(group_cycles(single, 1), 11u);
  const std::vector<std::uint64_t> cols{10, 4, 4, 4};
  EXPECT_EQ(group_cycles(cols, 1), 11u);
  const Schedule s = zero_skip_schedule({{{10, 2}, {6, 6}}, {{3}}}, cfg);
  EXPECT_EQ(s.array_cycles, (std::vector<std::uint64_t>{18, 4}));
  EXPECT_EQ(s.pe_cycles, 18u);
}

TEST(ColumnWork, UniformSparsity) {
  for (int zeros : {0, 16, 32, 48, 64}) {
    std::vector<SubWord> words(64, 0x1111);
    for (int i = 0; i < zeros; ++i) words[static_cast<std::size_t>(i * 64 / std::max(zeros, 1)) % 64] = 0;
    const auto nz = static_cast<std::uint64_t>(std::count_if(words.begin(), words.end(),
                                                             [](SubWord w) { return w != 0; }));
    EXPECT_EQ(column_work(words, true).processed, nz);
    EXPECT_EQ(column_work(words, false).processed, 64u);
  }
}

TEST(AccumulationChain, Examples) {
  const std::vector<std::int64_t> two{9, 10};
  EXPECT_EQ(accumulation_chain(two, 3), 11);
  const std::vector<std::int64_t> three{7, 1, 1};
  EXPECT_EQ(accumulation_chain(three, 3), 1);
  const std::vector<std::int64_t> zeros{0, 0, 0, 0};
  EXPECT_EQ(accumulation_chain(zeros, 3), 0);
}

TEST(AccumulationChain, ErrorBound) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::int64_t> d(-5000, 5000);
  for (int n = 2; n <= 4; ++n) {
    for (int t = 0; t < 2000; ++t) {
      std::vector<std::int64_t> p(static_cast<std::size_t>(n));
      for (auto& x : p) x = d(rng);
      const oracle::BigInt scaled = oracle::BigInt(accumulation_chain(p, 3)) << (3 * (n - 1));
      oracle::BigInt err = scaled - oracle::chain_exact_scaled(p, 3);
      if (err < 0) err = -err;
      ASSERT_LT(err, oracle::BigInt(n - 1) << (3 * (n - 1)));
    }
  }
}

TEST(PeConvolvePass, AllZeroInputPlaneCostsNothing) {
  ConvGeometry g;
  g.in_channels = 4;
  g.in_height = 4;
  g.in_width = 8;
  g.out_channels = 4;
  std::vector<std::int8_t> in(4 * 4 * 8, 0);
  std::vector<std::int8_t> wt(4 * 4, 3);
  PassSetup setup;
  setup.skip = true;
  const PassResult r = pe_convolve_pass(g, in, wt, setup, PEConfig{});
  EXPECT_EQ(r.report.mac_work_cycles, 0u);
  EXPECT_EQ(r.report.mac_executed, 0u);
  for (auto v : r.partials) EXPECT_EQ(v, 0);
}

TEST(PeConvolvePass, PartialsMatchDigitConvolution) {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> digit(-8, 7);
  for (int t = 0; t < 20; ++t) {
    ConvGeometry g;
    g.in_channels = 8;
    g.in_height = 4;
    g.in_width = 4;
    g.out_channels = 4;
    g.kernel_h = g.kernel_w = 3;
    g.padding = 1;
    std::vector<std::int8_t> in(8 * 4 * 4), wt(4 * 8 * 9);
    for (auto& x : in) x = static_cast<std::int8_t>(digit(rng));
    for (auto& x : wt) x = static_cast<std::int8_t>(digit(rng));
    oracle::Conv c{8, 4, 4, 4, 3, 3, 1, 1};
    const auto ref = oracle::convolve(c, {in.begin(), in.end()}, {wt.begin(), wt.end()});
    for (Orientation o : {Orientation::Input, Orientation::Weight}) {
      PassSetup setup;
      setup.orientation = o;
      setup.skip = t % 2 == 0;
      const PassResult r = pe_convolve_pass(g, in, wt, setup, PEConfig{});
      if (r.report.wrap_events != 0) continue;
      ASSERT_EQ(r.partials.size(), ref.size());
      for (std::size_t i = 0; i < ref.size(); ++i) ASSERT_EQ(oracle::BigInt(r.partials[i]), ref[i]);
    }
  }
}

TEST(LayerExecute, IdentityOneByOne) {
  LayerDescriptor l;
  l.in_channels = l.out_channels = 3;
  l.in_height = 2;
  l.in_width = 5;
  l.input_slices = l.weight_slices = SliceConfig::for_precision(4, 7);
  std::vector<std::int64_t> in(30), wt(9, 0);
  for (int i = 0; i < 30; ++i) in[static_cast<std::size_t>(i)] = (i * 37) % 128 - 64;
  for (int c = 0; c < 3; ++c) wt[static_cast<std::size_t>(c * 3 + c)] = 1;
  const QuantTensor inputs({3, 2, 5}, 7, in), weights({3, 3, 1, 1}, 7, wt);
  for (SkipMode m : {SkipMode::NoSkip, SkipMode::InputSkip, SkipMode::HybridSkip, SkipMode::InOutSkip}) {
    l.skip_mode = m;
    const LayerResult r = layer_execute(l, inputs, weights, PEConfig{});
    ASSERT_EQ(std::vector<std::int64_t>(r.outputs.values().begin(), r.outputs.values().end()), in);
  }
}

TEST(LayerExecute, MatchesIntegerConvolution) {
  std::mt19937_64 rng(2024);
  for (int t = 0; t < 60; ++t) {
    oracle::RandomLayer r = oracle::random_layer(rng);
    const auto ref = oracle::reference_outputs(r);
    std::uint64_t noskip_cycles = 0;
    for (SkipMode m : {SkipMode::NoSkip, SkipMode::InputSkip, SkipMode::HybridSkip}) {
      r.layer.skip_mode = m;
      for (auto orient : {std::optional<Orientation>{}, std::optional{Orientation::Weight}}) {
        ExecuteOptions opt;
        opt.force_orientation = orient;
        const LayerResult out = layer_execute(r.layer, r.inputs, r.weights, PEConfig{}, opt);
        ASSERT_EQ(out.outputs.size(), ref.size());
        for (std::size_t i = 0; i < ref.size(); ++i) ASSERT_EQ(oracle::BigInt(out.outputs[i]), ref[i]);
        if (m == SkipMode::NoSkip && !orient) noskip_cycles = out.report.total_cycles;
        if (m == SkipMode::InputSkip && !orient) EXPECT_LE(out.report.total_cycles, noskip_cycles);
      }
    }
  }
}

TEST(LayerExecute, SkippingNeverAddsMacs) {
  std::mt19937_64 rng(77);
  for (int t = 0; t < 30; ++t) {
    oracle::RandomLayer r = oracle::random_layer(rng);
    r.layer.skip_mode = SkipMode::NoSkip;
    const auto base = layer_execute(r.layer, r.inputs, r.weights, PEConfig{});
    r.layer.skip_mode = SkipMode::InputSkip;
    const auto skip = layer_execute(r.layer, r.inputs, r.weights, PEConfig{});
    EXPECT_LE(skip.report.mac_executed, base.report.mac_executed);
    EXPECT_EQ(skip.report.nominal_macs, base.report.nominal_macs);
    EXPECT_EQ(skip.report.mac_executed + skip.report.mac_skipped, skip.report.nominal_macs);
  }
}

TEST(LayerExecute, ChainedOutputsWithinBound) {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 20; ++t) {
    oracle::RandomLayer r = oracle::random_layer(rng);
    r.layer.pool_window = 0;
    const auto ref = oracle::reference_outputs(r);
    ExecuteOptions opt;
    opt.accumulate = AccumulateMode::Chained;
    const LayerResult out = layer_execute(r.layer, r.inputs, r.weights, PEConfig{}, opt);
    const int n = r.layer.input_slices.slices() + r.layer.weight_slices.slices() - 1;
    const int shift = 3 * (n - 1);
    for (std::size_t i = 0; i < ref.size(); ++i) {
      oracle::BigInt err = (oracle::BigInt(out.outputs[i]) << shift) - ref[i];
      if (err < 0) err = -err;
      ASSERT_LT(err, oracle::BigInt(std::max(n - 1, 1)) << shift);
    }
  }
}

}  // namespace
}  // namespace sbrsim
