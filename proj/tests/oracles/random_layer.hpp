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

#include <algorithm>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "sbrsim/codec.hpp"
#include "sbrsim/layer.hpp"

namespace sbrsim::oracle {

struct RandomLayer {
  LayerDescriptor layer;
  QuantTensor inputs;
  QuantTensor weights;
};

/// Small conv or FC layer with every extent at most 8, uniform operands with
/// a random share of exact zeros, and a pool window when the output allows.
inline RandomLayer random_layer(std::mt19937_64& rng, int max_dim = 8) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  RandomLayer r;
  LayerDescriptor& l = r.layer;
  l.kind = pick(0, 4) == 0 ? LayerKind::FullyConnected : LayerKind::Conv2D;
  l.in_channels = pick(1, max_dim);
  l.out_channels = pick(1, max_dim);
  if (l.kind == LayerKind::Conv2D) {
    l.in_height = pick(1, max_dim);
    l.in_width = pick(1, max_dim);
    l.kernel_h = pick(1, std::min(3, l.in_height));
    l.kernel_w = pick(1, std::min(3, l.in_width));
    l.stride = pick(1, 2);
    l.padding = pick(0, 1);
    if (l.geometry().output_positions() % 4 == 0 && pick(0, 1) == 1) l.pool_window = 4;
  }
  const int precisions[] = {4, 7, 10, 13};
  const int pi = precisions[pick(0, 3)];
  const int pw = precisions[pick(0, 3)];
  l.input_slices = SliceConfig::for_precision(4, pi);
  l.weight_slices = SliceConfig::for_precision(4, pw);
  l.validate();

  auto fill = [&](std::vector<std::size_t> dims, int p) {
    std::vector<std::int64_t> v(element_count(dims));
    const double zeros = std::uniform_real_distribution<double>(0.0, 0.8)(rng);
    std::bernoulli_distribution zero(zeros);
    std::uniform_int_distribution<std::int64_t> val(precision_min(p), precision_max(p));
    for (auto& x : v) x = zero(rng) ? 0 : val(rng);
    return QuantTensor(std::move(dims), p, std::move(v));
  };
  r.inputs = fill(l.input_dims(), pi);
  r.weights = fill(l.weight_dims(), pw);
  return r;
}

/// Reference outputs of a random layer, pooled when it pools.
inline std::vector<BigInt> reference_outputs(const RandomLayer& r) {
  const LayerDescriptor& l = r.layer;
  Conv c;
  c.ic = l.in_channels;
  c.oc = l.out_channels;
  if (l.kind == LayerKind::Conv2D) {
    c.ih = l.in_height;
    c.iw = l.in_width;
    c.kh = l.kernel_h;
    c.kw = l.kernel_w;
    c.stride = l.stride;
    c.pad = l.padding;
  }
  const std::vector<std::int64_t> in(r.inputs.values().begin(), r.inputs.values().end());
  const std::vector<std::int64_t> wt(r.weights.values().begin(), r.weights.values().end());
  std::vector<BigInt> out = convolve(c, in, wt);
  if (l.pooled()) out = max_pool(out, c.oc, l.pool_window);
  return out;
}

}  // namespace sbrsim::oracle
