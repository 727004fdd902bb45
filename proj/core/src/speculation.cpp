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

#include "sbrsim/speculation.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <numeric>

#include "sbrsim/error.hpp"

namespace sbrsim {

std::vector<std::pair<int, int>> score_passes(SpeculationMode mode, int input_planes,
                                              int weight_planes) {
  std::vector<std::pair<int, int>> passes{{input_planes - 1, weight_planes - 1}};
  if (mode == SpeculationMode::MMPlusLM) {
    for (int i = input_planes - 2; i >= 0; --i) passes.emplace_back(i, weight_planes - 1);
  }
  return passes;
}

namespace {

std::int64_t ipow(std::int64_t base, int exp) {
  std::int64_t r = 1;
  while (exp-- > 0) r *= base;
  return r;
}

std::vector<std::int64_t> reference_convolve(const ConvGeometry& g,
                                             std::span<const std::int64_t> in,
                                             std::span<const std::int64_t> wt) {
  const int OH = g.out_height(), OW = g.out_width();
  std::vector<std::int64_t> out(static_cast<std::size_t>(g.out_channels) * OH * OW, 0);
  for (int oc = 0; oc < g.out_channels; ++oc) {
    for (int oh = 0; oh < OH; ++oh) {
      for (int ow = 0; ow < OW; ++ow) {
        std::int64_t sum = 0;
        for (int ic = 0; ic < g.in_channels; ++ic) {
          for (int kh = 0; kh < g.kernel_h; ++kh) {
            const int ih = oh * g.stride - g.padding + kh;
            if (ih < 0 || ih >= g.in_height) continue;
            for (int kw = 0; kw < g.kernel_w; ++kw) {
              const int iw = ow * g.stride - g.padding + kw;
              if (iw < 0 || iw >= g.in_width) continue;
              sum += in[(static_cast<std::size_t>(ic) * g.in_height + ih) * g.in_width + iw] *
                     wt[((static_cast<std::size_t>(oc) * g.in_channels + ic) * g.kernel_h + kh) *
                            g.kernel_w +
                        kw];
            }
          }
        }
        out[(static_cast<std::size_t>(oc) * OH + oh) * OW + ow] = sum;
      }
    }
  }
  return out;
}

}  // namespace

std::vector<std::int64_t> scores_from_partials(const std::vector<std::vector<std::int64_t>>& partials,
                                               const std::vector<std::pair<int, int>>& passes,
                                               std::int64_t input_radix, std::int64_t weight_radix) {
  if (partials.size() != passes.size() || partials.empty()) {
    throw GeometryError("one partial tensor per score pass required");
  }
  std::vector<std::int64_t> scores(partials.front().size(), 0);
  for (std::size_t q = 0; q < passes.size(); ++q) {
    const std::int64_t scale =
        ipow(input_radix, passes[q].first) * ipow(weight_radix, passes[q].second);
    for (std::size_t e = 0; e < scores.size(); ++e) scores[e] += partials[q][e] * scale;
  }
  return scores;
}

std::vector<std::int64_t> speculation_scores(const ConvGeometry& geom, const SliceTensor& inputs,
                                             const SliceTensor& weights, SpeculationMode mode) {
  if (inputs.encoding() != weights.encoding()) {
    throw Error("speculation scores need both operands in one encoding");
  }
  const auto passes = score_passes(mode, inputs.plane_count(), weights.plane_count());
  PEConfig cfg;
  cfg.acc_width = 62;
  std::vector<std::vector<std::int64_t>> partials;
  for (auto [i, j] : passes) {
    PassSetup setup{i, j, Orientation::Input, false};
    partials.push_back(
        pe_convolve_pass(geom, inputs.plane(i), weights.plane(j), setup, cfg).partials);
  }
  return scores_from_partials(partials, passes, inputs.radix(), weights.radix());
}

std::vector<std::size_t> select_window(std::span<const std::int64_t> scores, int k) {
  if (k < 1 || static_cast<std::size_t>(k) > scores.size()) {
    throw RangeError(fmt::format("k = {} outside [1, {}]", k, scores.size()));
  }
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  idx.resize(static_cast<std::size_t>(k));
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::vector<std::uint8_t> select_candidates(std::span<const std::int64_t> scores,
                                            std::size_t channels, std::size_t positions,
                                            int window, int k) {
  if (window < 1 || positions % static_cast<std::size_t>(window) != 0 ||
      scores.size() != channels * positions) {
    throw GeometryError("score tensor does not tile into pooling windows");
  }
  std::vector<std::uint8_t> keep(scores.size(), 0);
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t w0 = 0; w0 < positions; w0 += static_cast<std::size_t>(window)) {
      const std::size_t base = c * positions + w0;
      for (auto i : select_window(scores.subspan(base, static_cast<std::size_t>(window)), k)) {
        keep[base + i] = 1;
      }
    }
  }
  return keep;
}

OutputMask widen_mask(std::span<const std::uint8_t> candidates, std::size_t channels,
                      std::size_t positions, int channel_group) {
  if (channel_group < 1 || candidates.size() != channels * positions) {
    throw GeometryError("candidate flags do not match the output shape");
  }
  OutputMask mask;
  mask.channel_group = channel_group;
  mask.positions = positions;
  const std::size_t groups = (channels + channel_group - 1) / channel_group;
  mask.keep.assign(groups * positions, 0);
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t p = 0; p < positions; ++p) {
      if (candidates[c * positions + p]) mask.keep[(c / channel_group) * positions + p] = 1;
    }
  }
  return mask;
}

std::vector<std::int8_t> mask_noncandidates(const ConvGeometry& g,
                                            std::span<const std::int8_t> input_plane,
                                            const OutputMask& mask, int block,
                                            const PEConfig& cfg) {
  if (g.kernel_h != 1 || g.kernel_w != 1 || g.stride != 1 || g.padding != 0) {
    throw GeometryError("stored-plane masking needs a 1x1, stride-1, unpadded layer");
  }
  const std::size_t positions = g.output_positions();
  if (input_plane.size() != static_cast<std::size_t>(g.in_channels) * positions ||
      mask.positions != positions) {
    throw GeometryError("mask and input plane disagree on positions");
  }
  std::vector<std::int8_t> out(input_plane.begin(), input_plane.end());
  const int first = block * cfg.arrays;
  const int last = std::min(g.out_channels, first + cfg.arrays);
  if (first >= last) throw GeometryError(fmt::format("block {} has no output channels", block));
  for (std::size_t p = 0; p < positions; ++p) {
    bool live = false;
    for (int oc = first; oc < last && !live; ++oc) live = mask.kept(oc, p);
    if (live) continue;
    for (int ic = 0; ic < g.in_channels; ++ic) out[static_cast<std::size_t>(ic) * positions + p] = 0;
  }
  return out;
}

SpeculativeResult speculative_layer_execute(const EncodedLayer& enc, const PEConfig& cfg,
                                            const ExecuteOptions& options) {
  const LayerDescriptor& layer = enc.layer;
  if (!layer.pooled()) throw GeometryError(fmt::format("layer '{}' has no pooling", layer.name));
  if (options.accumulate != AccumulateMode::Exact) {
    throw Error("speculation runs with exact accumulation only");
  }
  cfg.validate(layer.input_slices.width());
  const SpeculationConfig& spec = layer.speculation;
  const ConvGeometry& g = enc.geom;
  const int ni = enc.inputs.plane_count();
  const int nw = enc.weights.plane_count();
  const std::size_t channels = static_cast<std::size_t>(g.out_channels);
  const std::size_t positions = g.output_positions();
  if (spec.candidates > layer.pool_window) throw RangeError("more candidates than window size");

  SpeculativeResult result;
  result.dsm = enc.dsm;
  std::vector<std::vector<std::int64_t>> partials(static_cast<std::size_t>(ni) * nw);
  auto slot = [&](int i, int j) -> std::vector<std::int64_t>& {
    return partials[static_cast<std::size_t>(i) * nw + j];
  };
  bool first_pass = true;
  auto record = [&](PassResult& pass) {
    if (!first_pass) pass.report.obuf_reads = pass.report.obuf_writes;
    first_pass = false;
    result.report.add_pass(pass.report);
  };

  // Score passes run unmasked; their partials are kept for completion.
  const auto passes = score_passes(spec.mode, ni, nw);
  std::vector<std::vector<std::int64_t>> score_partials;
  for (auto [i, j] : passes) {
    const PassSetup setup = plan_pass(enc, SkipMode::InOutSkip, i, j, options);
    PassResult pass = pe_convolve_pass(g, enc.inputs.plane(i), enc.weights.plane(j), setup, cfg);
    record(pass);
    score_partials.push_back(pass.partials);
    slot(i, j) = std::move(pass.partials);
  }
  const std::vector<std::int64_t> scores =
      scores_from_partials(score_partials, passes, enc.inputs.radix(), enc.weights.radix());
  const auto candidates =
      select_candidates(scores, channels, positions, layer.pool_window, spec.candidates);
  result.mask = widen_mask(candidates, channels, positions, spec.channel_group);

  for (int i = 0; i < ni; ++i) {
    for (int j = 0; j < nw; ++j) {
      if (!slot(i, j).empty()) continue;
      const PassSetup setup = plan_pass(enc, SkipMode::InOutSkip, i, j, options, true);
      PassResult pass = pe_convolve_pass(g, enc.inputs.plane(i), enc.weights.plane(j), setup, cfg,
                                         &result.mask);
      result.stats.skipped_pass_macs +=
          pass.report.mac_executed_unmasked - pass.report.mac_executed;
      record(pass);
      slot(i, j) = std::move(pass.partials);
    }
  }

  // Pool over live positions only; dropped positions never reach the max.
  const std::vector<std::int64_t> conv = combine_partials(enc, partials, AccumulateMode::Exact);
  const std::size_t window = static_cast<std::size_t>(layer.pool_window);
  const std::size_t per = positions / window;
  std::vector<std::int64_t> pooled(channels * per);
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t q = 0; q < per; ++q) {
      bool any = false;
      std::int64_t best = 0;
      for (std::size_t p = q * window; p < (q + 1) * window; ++p) {
        if (!result.mask.kept(static_cast<int>(c), p)) continue;
        const std::int64_t v = conv[c * positions + p];
        if (!any || v > best) best = v;
        any = true;
      }
      pooled[c * per + q] = best;
    }
  }

  const QuantTensor in_values = decode_slices(enc.inputs);
  const QuantTensor w_values = decode_slices(enc.weights);
  const std::vector<std::int64_t> exact_pooled =
      max_pool(reference_convolve(g, in_values.values(), w_values.values()), channels, positions,
               layer.pool_window);

  const std::size_t group = static_cast<std::size_t>(spec.channel_group);
  double sq = 0.0;
  for (std::size_t e = 0; e < pooled.size(); ++e) {
    const double d = static_cast<double>(pooled[e] - exact_pooled[e]);
    sq += d * d;
    ++result.stats.channel_windows_total;
    result.stats.channel_windows_success += pooled[e] == exact_pooled[e];
  }
  for (std::size_t c0 = 0; c0 < channels; c0 += group) {
    for (std::size_t q = 0; q < per; ++q) {
      bool ok = true;
      for (std::size_t c = c0; c < std::min(channels, c0 + group) && ok; ++c) {
        ok = pooled[c * per + q] == exact_pooled[c * per + q];
      }
      ++result.stats.windows_total;
      result.stats.windows_success += ok;
    }
  }
  result.stats.success_rate =
      result.stats.windows_total
          ? static_cast<double>(result.stats.windows_success) / result.stats.windows_total
          : 1.0;
  result.stats.channel_success_rate =
      result.stats.channel_windows_total
          ? static_cast<double>(result.stats.channel_windows_success) /
                result.stats.channel_windows_total
          : 1.0;
  result.stats.output_mse = pooled.empty() ? 0.0 : sq / static_cast<double>(pooled.size());

  const int out_bits = output_precision(enc);
  add_memory_traffic(enc, SkipMode::InOutSkip, out_bits, result.report);
  result.outputs = QuantTensor(layer.output_dims(), out_bits, std::move(pooled));
  result.exact_outputs = QuantTensor(layer.output_dims(), out_bits, exact_pooled);
  return result;
}

ExecutionOutcome execute_layer(const EncodedLayer& enc, const PEConfig& cfg,
                               const ExecuteOptions& options) {
  ExecutionOutcome out;
  if (enc.layer.skip_mode == SkipMode::InOutSkip && enc.layer.pooled()) {
    SpeculativeResult r = speculative_layer_execute(enc, cfg, options);
    out.outputs = std::move(r.exact_outputs);
    out.report = std::move(r.report);
    out.dsm = std::move(r.dsm);
    out.speculative = true;
    out.speculative_outputs = std::move(r.outputs);
    out.speculation = r.stats;
    return out;
  }
  LayerResult r = layer_execute(enc, cfg, options);
  out.outputs = std::move(r.outputs);
  out.report = std::move(r.report);
  out.dsm = std::move(r.dsm);
  return out;
}

}  // namespace sbrsim
