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
#include <span>
#include <utility>
#include <vector>

#include "sbrsim/pe.hpp"

namespace sbrsim {

struct SpeculationStats {
  std::uint64_t windows_total = 0;    ///< (pooling window, channel group) pairs
  std::uint64_t windows_success = 0;  ///< every channel of the group pooled its true max
  double success_rate = 0.0;
  std::uint64_t channel_windows_total = 0;  ///< (pooling window, channel) pairs
  std::uint64_t channel_windows_success = 0;
  double channel_success_rate = 0.0;
  std::uint64_t skipped_pass_macs = 0;
  double output_mse = 0.0;
};

/// Plane pairs (input order, weight order) whose partials form the score.
std::vector<std::pair<int, int>> score_passes(SpeculationMode mode, int input_planes,
                                              int weight_planes);

/// Scores scaled to their true weight: P_ij · radix^(i+j) summed over the
/// score passes. `partials` is indexed like score_passes().
std::vector<std::int64_t> scores_from_partials(const std::vector<std::vector<std::int64_t>>& partials,
                                               const std::vector<std::pair<int, int>>& passes,
                                               std::int64_t input_radix, std::int64_t weight_radix);

/// Candidate scores for every conv output, [OC][OH*OW].
std::vector<std::int64_t> speculation_scores(const ConvGeometry& geom, const SliceTensor& inputs,
                                             const SliceTensor& weights, SpeculationMode mode);

/// Indices of the k best scores, ties to the lowest index, in ascending order.
std::vector<std::size_t> select_window(std::span<const std::int64_t> scores, int k);

/// Per-channel candidate flags [OC][positions] for consecutive windows.
std::vector<std::uint8_t> select_candidates(std::span<const std::int64_t> scores,
                                            std::size_t channels, std::size_t positions,
                                            int window, int k);

/// Widens per-channel flags to channel groups: a position stays live for the
/// whole group when any channel in it keeps the position.
OutputMask widen_mask(std::span<const std::uint8_t> candidates, std::size_t channels,
                      std::size_t positions, int channel_group);

/// Input plane as the RLE unit regenerates it for output-channel block
/// `block`: digits at positions no channel of the block keeps are zeroed.
/// Only for layouts where the gathered stream is the stored plane (1x1
/// kernel, stride 1, no padding).
std::vector<std::int8_t> mask_noncandidates(const ConvGeometry& geom,
                                            std::span<const std::int8_t> input_plane,
                                            const OutputMask& mask, int block,
                                            const PEConfig& cfg);

struct SpeculativeResult {
  QuantTensor outputs;        ///< pooled, candidates only
  QuantTensor exact_outputs;  ///< pooled, non-speculative
  SpeculationStats stats;
  CycleEnergyReport report;
  DsmDecision dsm;
  OutputMask mask;
};

/// Requires exact accumulation; throws Error otherwise.
SpeculativeResult speculative_layer_execute(const EncodedLayer& enc, const PEConfig& cfg,
                                            const ExecuteOptions& options = {});

/// Layer outcome under either execution path.
struct ExecutionOutcome {
  QuantTensor outputs;        ///< exact outputs (speculation-free)
  CycleEnergyReport report;
  DsmDecision dsm;
  bool speculative = false;
  QuantTensor speculative_outputs;
  SpeculationStats speculation;
};

/// Speculates on pooled InOutSkip layers and runs plain execution otherwise.
ExecutionOutcome execute_layer(const EncodedLayer& enc, const PEConfig& cfg,
                               const ExecuteOptions& options = {});

}  // namespace sbrsim
