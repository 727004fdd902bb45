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

#include <benchmark/benchmark.h>

#include "sbrsim/compression.hpp"
#include "sbrsim/pe.hpp"
#include "sbrsim/speculation.hpp"
#include "sbrsim/synthetic.hpp"

namespace sbrsim {
namespace {

QuantTensor activations(int p, std::vector<std::size_t> dims) {
  SyntheticSpec s;
  s.activation = Activation::LeakyRelu;
  s.target_zero_fraction = 0.292;
  s.calibration_precision = 7;
  return generate_synthetic_tensor(s, std::move(dims), p, 1);
}

QuantTensor weights(int p, std::vector<std::size_t> dims) {
  SyntheticSpec s;
  s.target_zero_fraction = 0.25;
  s.calibration_precision = 7;
  return generate_synthetic_tensor(s, std::move(dims), p, 2);
}

void BM_EncodeSbr(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  const QuantTensor t = activations(p, {32, 32, 32});
  const SliceConfig c = SliceConfig::for_precision(4, p);
  for (auto _ : state) benchmark::DoNotOptimize(encode_sbr(t, c));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(t.size()));
}
BENCHMARK(BM_EncodeSbr)->Arg(4)->Arg(7)->Arg(10)->Arg(13);

void BM_RleCompress(benchmark::State& state) {
  const QuantTensor t = activations(7, {32, 32, 32});
  const SliceTensor s = encode_sbr(t, SliceConfig::for_precision(4, 7));
  const SubWordStream words = pack_subwords(s.plane(0), s.dims(), PackAxis::Innermost, 4);
  for (auto _ : state) benchmark::DoNotOptimize(rle_compress(words));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(words.words.size()));
}
BENCHMARK(BM_RleCompress);

LayerDescriptor conv(int p, SkipMode mode) {
  LayerDescriptor l;
  l.in_channels = 32;
  l.in_height = l.in_width = 16;
  l.out_channels = 32;
  l.kernel_h = l.kernel_w = 3;
  l.padding = 1;
  l.input_slices = l.weight_slices = SliceConfig::for_precision(4, p);
  l.skip_mode = mode;
  return l;
}

void BM_LayerExecute(benchmark::State& state) {
  const LayerDescriptor l = conv(7, static_cast<SkipMode>(state.range(0)));
  const QuantTensor in = activations(7, l.input_dims());
  const QuantTensor wt = weights(7, l.weight_dims());
  const EncodedLayer enc = encode_layer(l, in, wt);
  for (auto _ : state) benchmark::DoNotOptimize(layer_execute(enc, PEConfig{}));
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(l.geometry().nominal_macs()));
}
BENCHMARK(BM_LayerExecute)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

void BM_Speculation(benchmark::State& state) {
  LayerDescriptor l;
  l.in_channels = 64;
  l.in_width = 1024;
  l.out_channels = 64;
  l.pool_window = 64;
  l.skip_mode = SkipMode::InOutSkip;
  l.speculation.candidates = static_cast<int>(state.range(0));
  l.input_slices = l.weight_slices = SliceConfig::for_precision(4, 7);
  SyntheticSpec g;
  g.distribution = Distribution::Gaussian;
  const QuantTensor in = generate_synthetic_tensor(g, l.input_dims(), 7, 3);
  const QuantTensor wt = generate_synthetic_tensor(g, l.weight_dims(), 7, 4);
  const EncodedLayer enc = encode_layer(l, in, wt);
  for (auto _ : state) benchmark::DoNotOptimize(speculative_layer_execute(enc, PEConfig{}));
}
BENCHMARK(BM_Speculation)->Arg(1)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace sbrsim

BENCHMARK_MAIN();
