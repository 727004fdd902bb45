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
#include <optional>
#include <span>
#include <vector>

#include "sbrsim/codec.hpp"
#include "sbrsim/compression.hpp"
#include "sbrsim/layer.hpp"

namespace sbrsim {

struct PEConfig {
  int arrays = 4;         ///< A: MAC arrays per PE, one output channel each
  int columns = 4;        ///< C: input-channel partitions per array
  int units = 4;          ///< U: spatial outputs per column (one sub-word lane each)
  int acc_width = 12;     ///< accumulation register width in bits
  int latch_depth = 1;
  int pes_per_mpu = 3;
  int drain_latency = 1;  ///< D: cycles to hand a group's partials to the accumulation unit

  int mac_units() const { return arrays * columns * units; }
  int product_width(int digit_width) const { return 2 * digit_width; }
  /// Throws GeometryError on an unusable configuration.
  void validate(int digit_width) const;
};

/// Exact product of two signed w-bit digits. Throws RangeError when a
/// digit lies outside [-2^(w-1), 2^(w-1)-1].
std::int64_t signed_mac_product(int a, int b, int width = 4);

struct WrapResult {
  std::int64_t value = 0;
  bool wrapped = false;
};

/// Two's-complement accumulation at `width` bits.
WrapResult accumulate_wrap(std::int64_t acc, std::int64_t addend, int width = 12);

/// Which operand sits in the IBUF and drives zero skipping.
enum class Orientation {
  Input,   ///< input sub-words broadcast, arrays hold output channels
  Weight,  ///< weight sub-words broadcast, arrays hold spatial outputs
};

std::string_view to_string(Orientation o);

/// Cost of one column's sub-word stream.
struct WorkCounts {
  std::uint64_t words = 0;      ///< stream length
  std::uint64_t nonzero = 0;
  std::uint64_t records = 0;    ///< RLE payload entries, fillers included
  std::uint64_t processed = 0;  ///< MAC cycles spent on the stream
};

WorkCounts column_work(std::span<const SubWord> words, bool skip);

/// Cycle total of one accumulation group: slowest column plus drain.
std::uint64_t group_cycles(std::span<const std::uint64_t> column_work, int drain_latency);

struct Schedule {
  std::vector<std::uint64_t> array_cycles;
  std::uint64_t pe_cycles = 0;
};

/// work[array][group][column] -> per-array cycle totals and PE time.
Schedule zero_skip_schedule(const std::vector<std::vector<std::vector<std::uint64_t>>>& work,
                            const PEConfig& cfg);

/// Outputs kept per channel group and flattened spatial position.
struct OutputMask {
  int channel_group = 4;
  std::size_t positions = 0;
  std::vector<std::uint8_t> keep;  ///< [oc / channel_group][position]

  bool kept(int oc, std::size_t pos) const {
    return keep[static_cast<std::size_t>(oc / channel_group) * positions + pos] != 0;
  }
};

struct PassSetup {
  int input_order = 0;
  int weight_order = 0;
  Orientation orientation = Orientation::Input;
  bool skip = false;
};

struct PassReport {
  int input_order = 0;
  int weight_order = 0;
  Orientation orientation = Orientation::Input;
  bool skip = false;
  bool masked = false;
  std::uint64_t cycles = 0;
  std::uint64_t mac_work_cycles = 0;
  std::uint64_t nominal_macs = 0;
  std::uint64_t mac_executed = 0;
  std::uint64_t mac_skipped = 0;
  std::uint64_t mac_executed_unmasked = 0;
  std::uint64_t ibuf_reads = 0;
  std::uint64_t wbuf_reads = 0;
  std::uint64_t idxbuf_reads = 0;
  std::uint64_t obuf_reads = 0;
  std::uint64_t obuf_writes = 0;
  std::uint64_t rf_accesses = 0;
  std::uint64_t wrap_events = 0;
};

struct PassResult {
  std::vector<std::int64_t> partials;  ///< [OC][OH*OW], wide accumulation
  PassReport report;
};

/// One slice pass: input plane `input_order` against weight plane
/// `weight_order`. Inputs are [IC, IH, IW] digits, weights [OC, IC, KH, KW].
/// Positions masked out by `mask` get a zero partial and their sub-words
/// are zeroed before the skipping walk.
PassResult pe_convolve_pass(const ConvGeometry& geom, std::span<const std::int8_t> input_plane,
                            std::span<const std::int8_t> weight_plane, const PassSetup& setup,
                            const PEConfig& cfg, const OutputMask* mask = nullptr);

/// Horner recurrence r = (r >> m) + P_k from the lowest combined order up.
std::int64_t accumulation_chain(std::span<const std::int64_t> partials, int shift);

/// Collapses P_ij (row-major [i][j]) into combined orders k = i + j first.
std::int64_t accumulation_chain(std::span<const std::int64_t> partials, int input_planes,
                                int weight_planes, int shift);

struct EnergyCosts {
  double mac = 1.0;
  double rf = 1.0;
  double sram = 6.0;
  double dram_byte = 200.0;
  double noc_hop_bit = 0.1;
};

struct CycleEnergyReport {
  std::vector<PassReport> passes;
  std::uint64_t total_cycles = 0;
  std::uint64_t mac_work_cycles = 0;
  std::uint64_t nominal_macs = 0;
  std::uint64_t mac_executed = 0;
  std::uint64_t mac_skipped = 0;
  std::uint64_t ibuf_reads = 0;
  std::uint64_t ibuf_writes = 0;
  std::uint64_t wbuf_reads = 0;
  std::uint64_t wbuf_writes = 0;
  std::uint64_t idxbuf_reads = 0;
  std::uint64_t idxbuf_writes = 0;
  std::uint64_t obuf_reads = 0;
  std::uint64_t obuf_writes = 0;
  std::uint64_t rf_accesses = 0;
  std::uint64_t wrap_events = 0;
  std::uint64_t noc_bytes = 0;
  std::uint64_t noc_hop_bits = 0;
  std::uint64_t dram_bytes = 0;

  void add_pass(const PassReport& pass);
  std::uint64_t sram_accesses() const;
  /// Relative energy proxy, Σ count · unit cost.
  double energy(const EnergyCosts& costs) const;
  const PassReport* find_pass(int input_order, int weight_order) const;
};

struct ExecuteOptions {
  AccumulateMode accumulate = AccumulateMode::Exact;
  Encoding encoding = Encoding::Sbr;
  /// Pins every pass to one operand role; skipping follows the skip mode.
  std::optional<Orientation> force_orientation;
  DsmPolicy dsm;
};

/// Operands of one layer after encoding and sparsity monitoring.
struct EncodedLayer {
  LayerDescriptor layer;
  ConvGeometry geom;
  SliceTensor inputs;
  SliceTensor weights;
  SparsityStats input_stats;
  SparsityStats weight_stats;
  DsmDecision dsm;
  TensorCompression input_compression;
  TensorCompression weight_compression;
};

EncodedLayer encode_layer(const LayerDescriptor& layer, const QuantTensor& inputs,
                          const QuantTensor& weights, Encoding encoding = Encoding::Sbr,
                          const DsmPolicy& policy = {});

/// Operand role and skipping for pass (i, j) under `mode`. A completion
/// pass of a speculative layer skips on input when the DSM declines.
PassSetup plan_pass(const EncodedLayer& enc, SkipMode mode, int input_order, int weight_order,
                    const ExecuteOptions& options, bool completion = false);

/// Bits of one output element under exact accumulation.
int output_precision(const EncodedLayer& enc);

/// Combines per-pass partials into conv outputs ([OC][positions]).
std::vector<std::int64_t> combine_partials(const EncodedLayer& enc,
                                           const std::vector<std::vector<std::int64_t>>& partials,
                                           AccumulateMode mode);

/// Max over `window` consecutive positions per channel.
std::vector<std::int64_t> max_pool(std::span<const std::int64_t> values, std::size_t channels,
                                   std::size_t positions, int window);

/// Stored bits per plane of one operand: RLE size for planes the mode keeps
/// compressed, raw sub-word size otherwise.
std::vector<std::uint64_t> stored_plane_bits(const EncodedLayer& enc, SkipMode mode, bool input);

/// Storage, buffer-fill, and transfer counters for the layer's operands.
void add_memory_traffic(const EncodedLayer& enc, SkipMode mode, int output_bits,
                        CycleEnergyReport& report);

struct LayerResult {
  QuantTensor outputs;
  CycleEnergyReport report;
  DsmDecision dsm;
};

/// Executes a layer without speculation.
LayerResult layer_execute(const LayerDescriptor& layer, const QuantTensor& inputs,
                          const QuantTensor& weights, const PEConfig& cfg,
                          const ExecuteOptions& options = {});

LayerResult layer_execute(const EncodedLayer& enc, const PEConfig& cfg,
                          const ExecuteOptions& options = {});

}  // namespace sbrsim
