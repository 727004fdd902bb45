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

#include "sbrsim/pe.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <bit>

#include "sbrsim/error.hpp"

namespace sbrsim {

void PEConfig::validate(int digit_width) const {
  if (arrays < 1 || columns < 1) throw GeometryError("PE needs at least one array and column");
  if (units != kSubwordDigits) {
    throw GeometryError(fmt::format("units per column must equal the sub-word lane count {}",
                                    kSubwordDigits));
  }
  if (acc_width < product_width(digit_width) || acc_width > 62) {
    throw GeometryError(fmt::format("accumulator width {} must hold a {}-bit product", acc_width,
                                    product_width(digit_width)));
  }
  if (latch_depth < 1 || drain_latency < 0 || pes_per_mpu < 1) {
    throw GeometryError("bad PE timing parameters");
  }
}

std::int64_t signed_mac_product(int a, int b, int width) {
  const int lo = -(1 << (width - 1));
  const int hi = (1 << (width - 1)) - 1;
  if (a < lo || a > hi || b < lo || b > hi) {
    throw RangeError(fmt::format("digits ({}, {}) exceed a {}-bit signed slice", a, b, width));
  }
  return static_cast<std::int64_t>(a) * b;
}

WrapResult accumulate_wrap(std::int64_t acc, std::int64_t addend, int width) {
  const std::int64_t sum = acc + addend;
  const std::uint64_t mask = (std::uint64_t{1} << width) - 1;
  const std::uint64_t sign = std::uint64_t{1} << (width - 1);
  const std::uint64_t field = static_cast<std::uint64_t>(sum) & mask;
  const std::int64_t wrapped =
      static_cast<std::int64_t>(field ^ sign) - static_cast<std::int64_t>(sign);
  return {wrapped, wrapped != sum};
}

std::string_view to_string(Orientation o) { return o == Orientation::Input ? "input" : "weight"; }

WorkCounts column_work(std::span<const SubWord> words, bool skip) {
  WorkCounts w;
  RleRecordCounter records;
  w.words = words.size();
  for (SubWord word : words) {
    w.nonzero += word != 0;
    records.push(word != 0);
  }
  w.records = records.records();
  w.processed = skip ? w.nonzero : w.words;
  return w;
}

std::uint64_t group_cycles(std::span<const std::uint64_t> column_work, int drain_latency) {
  std::uint64_t slowest = 0;
  for (auto c : column_work) slowest = std::max(slowest, c);
  return slowest + static_cast<std::uint64_t>(drain_latency);
}

Schedule zero_skip_schedule(const std::vector<std::vector<std::vector<std::uint64_t>>>& work,
                            const PEConfig& cfg) {
  Schedule s;
  for (const auto& groups : work) {
    std::uint64_t total = 0;
    for (const auto& columns : groups) total += group_cycles(columns, cfg.drain_latency);
    s.array_cycles.push_back(total);
    s.pe_cycles = std::max(s.pe_cycles, total);
  }
  return s;
}

namespace {

int ceil_div(int a, int b) { return (a + b - 1) / b; }

// Per-pass lane masks derived from the output mask. In input orientation a
// lane (spatial output) of block b is zeroed when no channel of the block
// keeps it; in weight orientation a lane (output channel) is zeroed when
// the channel is dropped at every position of the tile.
struct LaneMasks {
  int blocks = 0;
  int tiles = 0;
  std::size_t positions = 0;
  int out_w = 0;
  std::vector<std::uint8_t> input_live;   // [block][position]
  std::vector<std::uint8_t> weight_live;  // [oc][oh][tile]

  bool output_live(Orientation o, int oc, int oh, int ow, int arrays, int units) const {
    if (o == Orientation::Input) {
      return input_live[static_cast<std::size_t>(oc / arrays) * positions +
                        static_cast<std::size_t>(oh) * out_w + ow] != 0;
    }
    return weight_live[(static_cast<std::size_t>(oc) * (positions / out_w) + oh) * tiles +
                       ow / units] != 0;
  }
};

LaneMasks build_lane_masks(const ConvGeometry& g, const OutputMask& mask, const PEConfig& cfg) {
  LaneMasks lm;
  const int oh_n = g.out_height();
  lm.out_w = g.out_width();
  lm.positions = g.output_positions();
  lm.blocks = ceil_div(g.out_channels, cfg.arrays);
  lm.tiles = ceil_div(lm.out_w, cfg.units);
  if (mask.positions != lm.positions ||
      mask.keep.size() !=
          static_cast<std::size_t>(ceil_div(g.out_channels, mask.channel_group)) * lm.positions) {
    throw GeometryError("output mask does not match the layer geometry");
  }
  lm.input_live.assign(static_cast<std::size_t>(lm.blocks) * lm.positions, 0);
  for (int oc = 0; oc < g.out_channels; ++oc) {
    for (std::size_t pos = 0; pos < lm.positions; ++pos) {
      if (mask.kept(oc, pos)) lm.input_live[(oc / cfg.arrays) * lm.positions + pos] = 1;
    }
  }
  lm.weight_live.assign(static_cast<std::size_t>(g.out_channels) * oh_n * lm.tiles, 0);
  for (int oc = 0; oc < g.out_channels; ++oc) {
    for (int oh = 0; oh < oh_n; ++oh) {
      for (int ow = 0; ow < lm.out_w; ++ow) {
        if (mask.kept(oc, static_cast<std::size_t>(oh) * lm.out_w + ow)) {
          lm.weight_live[(static_cast<std::size_t>(oc) * oh_n + oh) * lm.tiles + ow / cfg.units] = 1;
        }
      }
    }
  }
  return lm;
}

}  // namespace

PassResult pe_convolve_pass(const ConvGeometry& g, std::span<const std::int8_t> in,
                            std::span<const std::int8_t> wt, const PassSetup& setup,
                            const PEConfig& cfg, const OutputMask* mask) {
  const int IC = g.in_channels, IH = g.in_height, IW = g.in_width;
  const int OC = g.out_channels, KH = g.kernel_h, KW = g.kernel_w;
  const int S = g.stride, P = g.padding;
  const int OH = g.out_height(), OW = g.out_width();
  if (OH < 1 || OW < 1) throw GeometryError("pass geometry has no outputs");
  if (in.size() != static_cast<std::size_t>(IC) * IH * IW) {
    throw GeometryError(fmt::format("input plane holds {} digits, geometry needs {}", in.size(),
                                    static_cast<std::size_t>(IC) * IH * IW));
  }
  if (wt.size() != static_cast<std::size_t>(OC) * IC * KH * KW) {
    throw GeometryError(fmt::format("weight plane holds {} digits, geometry needs {}", wt.size(),
                                    static_cast<std::size_t>(OC) * IC * KH * KW));
  }
  const std::size_t positions = g.output_positions();
  const int A = cfg.arrays, C = cfg.columns, U = cfg.units;

  std::optional<LaneMasks> lanes;
  if (mask) lanes = build_lane_masks(g, *mask, cfg);
  const Orientation orient = setup.orientation;

  auto in_at = [&](int ic, int ih, int iw) -> int {
    if (ih < 0 || ih >= IH || iw < 0 || iw >= IW) return 0;
    return in[(static_cast<std::size_t>(ic) * IH + ih) * IW + iw];
  };
  auto w_at = [&](int oc, int ic, int kh, int kw) -> int {
    return wt[((static_cast<std::size_t>(oc) * IC + ic) * KH + kh) * KW + kw];
  };

  PassResult result;
  PassReport& r = result.report;
  r.input_order = setup.input_order;
  r.weight_order = setup.weight_order;
  r.orientation = orient;
  r.skip = setup.skip;
  r.masked = mask != nullptr;
  r.nominal_macs = g.nominal_macs();

  // Functional partials with the per-column 12-bit register run alongside.
  result.partials.assign(static_cast<std::size_t>(OC) * positions, 0);
  for (int oc = 0; oc < OC; ++oc) {
    for (int oh = 0; oh < OH; ++oh) {
      for (int ow = 0; ow < OW; ++ow) {
        if (lanes && !lanes->output_live(orient, oc, oh, ow, A, U)) continue;
        std::int64_t wide = 0;
        for (int c = 0; c < C; ++c) {
          std::int64_t acc = 0;
          for (int ic = c; ic < IC; ic += C) {
            for (int kh = 0; kh < KH; ++kh) {
              const int ih = oh * S - P + kh;
              for (int kw = 0; kw < KW; ++kw) {
                const int a = in_at(ic, ih, ow * S - P + kw);
                if (a == 0) continue;
                const int b = w_at(oc, ic, kh, kw);
                if (b == 0) continue;
                const std::int64_t prod = static_cast<std::int64_t>(a) * b;
                wide += prod;
                const WrapResult wr = accumulate_wrap(acc, prod, cfg.acc_width);
                acc = wr.value;
                r.wrap_events += wr.wrapped;
              }
            }
          }
        }
        result.partials[static_cast<std::size_t>(oc) * positions +
                        static_cast<std::size_t>(oh) * OW + ow] = wide;
      }
    }
  }

  // Cycle model: one accumulation group per (output-channel block, output
  // row, tile of U outputs along the row). Every column walks its gathered
  // sub-word stream; arrays see the same broadcast stream.
  const int blocks = ceil_div(OC, A);
  const int tiles = ceil_div(OW, U);
  std::vector<std::uint64_t> column_cycles(C);
  for (int b = 0; b < blocks; ++b) {
    const int oc_valid = std::min(A, OC - b * A);
    for (int oh = 0; oh < OH; ++oh) {
      for (int t = 0; t < tiles; ++t) {
        const int ow_valid = std::min(U, OW - t * U);
        const std::uint64_t lanes_x_arrays = static_cast<std::uint64_t>(oc_valid) * ow_valid;
        for (int c = 0; c < C; ++c) {
          RleRecordCounter records;
          std::uint64_t words = 0, nonzero = 0, nonzero_unmasked = 0;
          for (int ic = c; ic < IC; ic += C) {
            for (int kh = 0; kh < KH; ++kh) {
              const int ih = oh * S - P + kh;
              for (int kw = 0; kw < KW; ++kw) {
                bool any = false, any_live = false;
                if (orient == Orientation::Input) {
                  for (int u = 0; u < ow_valid; ++u) {
                    const int ow = t * U + u;
                    if (in_at(ic, ih, ow * S - P + kw) == 0) continue;
                    any = true;
                    if (!lanes || lanes->input_live[static_cast<std::size_t>(b) * positions +
                                                    static_cast<std::size_t>(oh) * OW + ow]) {
                      any_live = true;
                      break;
                    }
                  }
                } else {
                  for (int a = 0; a < oc_valid; ++a) {
                    const int oc = b * A + a;
                    if (w_at(oc, ic, kh, kw) == 0) continue;
                    any = true;
                    if (!lanes || lanes->weight_live[(static_cast<std::size_t>(oc) * OH + oh) *
                                                         tiles + t]) {
                      any_live = true;
                      break;
                    }
                  }
                }
                ++words;
                nonzero += any_live;
                nonzero_unmasked += any;
                records.push(any_live);
              }
            }
          }
          const std::uint64_t processed = setup.skip ? nonzero : words;
          const std::uint64_t processed_unmasked = setup.skip ? nonzero_unmasked : words;
          column_cycles[c] = processed;
          r.mac_executed += processed * lanes_x_arrays;
          r.mac_executed_unmasked += processed_unmasked * lanes_x_arrays;
          r.wbuf_reads += processed * static_cast<std::uint64_t>(oc_valid);
          if (setup.skip) {
            r.ibuf_reads += records.records();
            r.idxbuf_reads += records.records();
          } else {
            r.ibuf_reads += words;
          }
        }
        const std::uint64_t work = *std::max_element(column_cycles.begin(), column_cycles.end());
        r.mac_work_cycles += work;
        r.cycles += work + static_cast<std::uint64_t>(cfg.drain_latency);
        r.obuf_writes += lanes_x_arrays;
      }
    }
  }
  r.mac_skipped = r.nominal_macs - r.mac_executed;
  r.rf_accesses = r.mac_executed;
  return result;
}

std::int64_t accumulation_chain(std::span<const std::int64_t> partials, int shift) {
  if (partials.empty()) return 0;
  std::int64_t r = partials[0];
  for (std::size_t k = 1; k < partials.size(); ++k) r = (r >> shift) + partials[k];
  return r;
}

std::int64_t accumulation_chain(std::span<const std::int64_t> partials, int input_planes,
                                int weight_planes, int shift) {
  if (partials.size() != static_cast<std::size_t>(input_planes) * weight_planes) {
    throw GeometryError("partial count does not match the plane grid");
  }
  std::vector<std::int64_t> orders(static_cast<std::size_t>(input_planes + weight_planes - 1), 0);
  for (int i = 0; i < input_planes; ++i) {
    for (int j = 0; j < weight_planes; ++j) {
      orders[static_cast<std::size_t>(i + j)] +=
          partials[static_cast<std::size_t>(i) * weight_planes + j];
    }
  }
  return accumulation_chain(orders, shift);
}

void CycleEnergyReport::add_pass(const PassReport& p) {
  passes.push_back(p);
  total_cycles += p.cycles;
  mac_work_cycles += p.mac_work_cycles;
  nominal_macs += p.nominal_macs;
  mac_executed += p.mac_executed;
  mac_skipped += p.mac_skipped;
  ibuf_reads += p.ibuf_reads;
  wbuf_reads += p.wbuf_reads;
  idxbuf_reads += p.idxbuf_reads;
  obuf_reads += p.obuf_reads;
  obuf_writes += p.obuf_writes;
  rf_accesses += p.rf_accesses;
  wrap_events += p.wrap_events;
}

std::uint64_t CycleEnergyReport::sram_accesses() const {
  return ibuf_reads + ibuf_writes + wbuf_reads + wbuf_writes + idxbuf_reads + idxbuf_writes +
         obuf_reads + obuf_writes;
}

double CycleEnergyReport::energy(const EnergyCosts& c) const {
  return c.mac * static_cast<double>(mac_executed) + c.rf * static_cast<double>(rf_accesses) +
         c.sram * static_cast<double>(sram_accesses()) +
         c.dram_byte * static_cast<double>(dram_bytes) +
         c.noc_hop_bit * static_cast<double>(noc_hop_bits);
}

const PassReport* CycleEnergyReport::find_pass(int input_order, int weight_order) const {
  for (const auto& p : passes) {
    if (p.input_order == input_order && p.weight_order == weight_order) return &p;
  }
  return nullptr;
}

EncodedLayer encode_layer(const LayerDescriptor& layer, const QuantTensor& inputs,
                          const QuantTensor& weights, Encoding encoding, const DsmPolicy& policy) {
  layer.validate();
  if (!layer.has_weights()) throw GeometryError("max-pool layers carry no slice passes");
  if (inputs.dims() != layer.input_dims()) {
    throw GeometryError(fmt::format("layer '{}': input dims do not match the descriptor", layer.name));
  }
  if (weights.dims() != layer.weight_dims()) {
    throw GeometryError(fmt::format("layer '{}': weight dims do not match the descriptor", layer.name));
  }
  if (inputs.precision() != layer.input_slices.precision() ||
      weights.precision() != layer.weight_slices.precision()) {
    throw GeometryError(fmt::format("layer '{}': tensor precision differs from its slice config",
                                    layer.name));
  }
  SliceTensor in = encode(inputs, layer.input_slices, encoding);
  SliceTensor wt = encode(weights, layer.weight_slices, encoding);
  if (layer.kind == LayerKind::FullyConnected) {
    // Stored like a 1x1 activation map: one element per sub-word, as the
    // arrays consume it.
    std::vector<std::vector<std::int8_t>> planes;
    for (int k = 0; k < in.plane_count(); ++k) planes.emplace_back(in.plane(k).begin(), in.plane(k).end());
    in = SliceTensor(in.config(), in.encoding(),
                     {static_cast<std::size_t>(layer.in_channels), 1, 1}, std::move(planes));
  }
  SparsityStats in_stats = sparsity_stats(in, PackAxis::Innermost);
  SparsityStats wt_stats = sparsity_stats(wt, PackAxis::Outermost);
  DsmDecision dsm = dsm_decide(in_stats, wt_stats, policy);
  // Conventional lower slices are unsigned w-bit fields and cannot be packed
  // as signed lanes; their storage is accounted raw.
  const bool packable = encoding != Encoding::Conventional;
  TensorCompression in_comp = packable ? compress_tensor(in, PackAxis::Innermost) : TensorCompression{};
  TensorCompression wt_comp = packable ? compress_tensor(wt, PackAxis::Outermost) : TensorCompression{};
  return EncodedLayer{layer,        layer.geometry(),    std::move(in),      std::move(wt),
                      std::move(in_stats), std::move(wt_stats), std::move(dsm), std::move(in_comp),
                      std::move(wt_comp)};
}

PassSetup plan_pass(const EncodedLayer& enc, SkipMode mode, int i, int j,
                    const ExecuteOptions& options, bool completion) {
  PassSetup s;
  s.input_order = i;
  s.weight_order = j;
  switch (mode) {
    case SkipMode::NoSkip:
      s.orientation = Orientation::Input;
      s.skip = false;
      break;
    case SkipMode::InputSkip:
      s.orientation = Orientation::Input;
      s.skip = true;
      break;
    case SkipMode::HybridSkip:
    case SkipMode::InOutSkip: {
      const SkipOperand op = enc.dsm.skip_operand(i, j);
      s.orientation = op == SkipOperand::Weight ? Orientation::Weight : Orientation::Input;
      s.skip = op != SkipOperand::None || completion;
      break;
    }
  }
  if (options.force_orientation) s.orientation = *options.force_orientation;
  return s;
}

int output_precision(const EncodedLayer& enc) {
  const ConvGeometry& g = enc.geom;
  const std::uint64_t reduction =
      static_cast<std::uint64_t>(g.in_channels) * static_cast<std::uint64_t>(g.kernel_size());
  const int growth = static_cast<int>(std::bit_width(reduction - 1));
  return std::min(QuantTensor::kMaxPrecision,
                  enc.layer.input_slices.precision() + enc.layer.weight_slices.precision() + growth);
}

std::vector<std::int64_t> combine_partials(const EncodedLayer& enc,
                                           const std::vector<std::vector<std::int64_t>>& partials,
                                           AccumulateMode mode) {
  const int ni = enc.inputs.plane_count();
  const int nw = enc.weights.plane_count();
  if (partials.size() != static_cast<std::size_t>(ni) * nw) {
    throw GeometryError("one partial tensor per plane pair required");
  }
  const std::size_t count = partials.empty() ? 0 : partials.front().size();
  std::vector<std::int64_t> out(count, 0);
  const std::int64_t radix_in = enc.inputs.radix();
  const std::int64_t radix_w = enc.weights.radix();
  if (mode == AccumulateMode::Exact) {
    for (int i = 0; i < ni; ++i) {
      for (int j = 0; j < nw; ++j) {
        std::int64_t scale = 1;
        for (int k = 0; k < i; ++k) scale *= radix_in;
        for (int k = 0; k < j; ++k) scale *= radix_w;
        const auto& p = partials[static_cast<std::size_t>(i) * nw + j];
        for (std::size_t e = 0; e < count; ++e) out[e] += p[e] * scale;
      }
    }
    return out;
  }
  if (radix_in != radix_w) throw GeometryError("chained accumulation needs one radix");
  const int shift = std::countr_zero(static_cast<std::uint64_t>(radix_in));
  std::vector<std::int64_t> pij(partials.size());
  for (std::size_t e = 0; e < count; ++e) {
    for (std::size_t q = 0; q < partials.size(); ++q) pij[q] = partials[q][e];
    out[e] = accumulation_chain(pij, ni, nw, shift);
  }
  return out;
}

std::vector<std::int64_t> max_pool(std::span<const std::int64_t> values, std::size_t channels,
                                   std::size_t positions, int window) {
  if (window < 1 || positions % static_cast<std::size_t>(window) != 0 ||
      values.size() != channels * positions) {
    throw GeometryError("pooling window does not tile the outputs");
  }
  const std::size_t per = positions / static_cast<std::size_t>(window);
  std::vector<std::int64_t> out(channels * per);
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t q = 0; q < per; ++q) {
      auto first = values.begin() + static_cast<std::ptrdiff_t>(c * positions + q * window);
      out[c * per + q] = *std::max_element(first, first + window);
    }
  }
  return out;
}

namespace {

bool plane_compressed(const EncodedLayer& enc, SkipMode mode, bool input, int plane) {
  const TensorCompression& tc = input ? enc.input_compression : enc.weight_compression;
  if (tc.planes.empty()) return false;
  switch (mode) {
    case SkipMode::NoSkip: return false;
    case SkipMode::InputSkip: return input;
    case SkipMode::HybridSkip:
    case SkipMode::InOutSkip:
      return input ? enc.dsm.input_compress[plane] : enc.dsm.weight_compress[plane];
  }
  return false;
}

std::uint64_t plane_subwords(const EncodedLayer& enc, bool input, int plane) {
  const TensorCompression& tc = input ? enc.input_compression : enc.weight_compression;
  if (!tc.planes.empty()) return tc.planes[plane].total_subwords;
  const SliceTensor& st = input ? enc.inputs : enc.weights;
  return subword_count(st.dims(), input ? PackAxis::Innermost : PackAxis::Outermost);
}

}  // namespace

std::vector<std::uint64_t> stored_plane_bits(const EncodedLayer& enc, SkipMode mode, bool input) {
  const SliceTensor& st = input ? enc.inputs : enc.weights;
  const TensorCompression& tc = input ? enc.input_compression : enc.weight_compression;
  const auto sw_bits = static_cast<std::uint64_t>(subword_bits(st.config().width()));
  std::vector<std::uint64_t> bits;
  for (int p = 0; p < st.plane_count(); ++p) {
    bits.push_back(plane_compressed(enc, mode, input, p) ? tc.compressed_bits[p]
                                                        : plane_subwords(enc, input, p) * sw_bits);
  }
  return bits;
}

void add_memory_traffic(const EncodedLayer& enc, SkipMode mode, int output_bits,
                        CycleEnergyReport& report) {
  std::uint64_t operand_bytes = 0;
  for (bool input : {true, false}) {
    const SliceTensor& st = input ? enc.inputs : enc.weights;
    const TensorCompression& tc = input ? enc.input_compression : enc.weight_compression;
    std::uint64_t bits = 0, words = 0, records = 0;
    for (int p = 0; p < st.plane_count(); ++p) {
      if (plane_compressed(enc, mode, input, p)) {
        bits += tc.compressed_bits[p];
        words += tc.planes[p].records();
        records += tc.planes[p].records();
      } else {
        const std::uint64_t n = plane_subwords(enc, input, p);
        bits += n * static_cast<std::uint64_t>(subword_bits(st.config().width()));
        words += n;
      }
    }
    (input ? report.ibuf_writes : report.wbuf_writes) += words;
    report.idxbuf_writes += records;
    operand_bytes += (bits + 7) / 8;
  }
  const std::uint64_t out_elems = element_count(enc.layer.output_dims());
  const std::uint64_t out_bytes = (out_elems * static_cast<std::uint64_t>(output_bits) + 7) / 8;
  report.noc_bytes += operand_bytes;
  report.dram_bytes += operand_bytes + out_bytes;
}

LayerResult layer_execute(const EncodedLayer& enc, const PEConfig& cfg,
                          const ExecuteOptions& options) {
  cfg.validate(enc.layer.input_slices.width());
  const int ni = enc.inputs.plane_count();
  const int nw = enc.weights.plane_count();
  LayerResult result;
  result.dsm = enc.dsm;
  std::vector<std::vector<std::int64_t>> partials;
  partials.reserve(static_cast<std::size_t>(ni) * nw);
  for (int i = 0; i < ni; ++i) {
    for (int j = 0; j < nw; ++j) {
      const PassSetup setup = plan_pass(enc, enc.layer.skip_mode, i, j, options);
      PassResult pass =
          pe_convolve_pass(enc.geom, enc.inputs.plane(i), enc.weights.plane(j), setup, cfg);
      if (!partials.empty()) pass.report.obuf_reads = pass.report.obuf_writes;
      result.report.add_pass(pass.report);
      partials.push_back(std::move(pass.partials));
    }
  }
  std::vector<std::int64_t> conv = combine_partials(enc, partials, options.accumulate);
  const int out_bits = output_precision(enc);
  if (enc.layer.pooled()) {
    conv = max_pool(conv, static_cast<std::size_t>(enc.geom.out_channels),
                    enc.geom.output_positions(), enc.layer.pool_window);
  }
  add_memory_traffic(enc, enc.layer.skip_mode, out_bits, result.report);
  result.outputs = QuantTensor(enc.layer.output_dims(), out_bits, std::move(conv));
  return result;
}

LayerResult layer_execute(const LayerDescriptor& layer, const QuantTensor& inputs,
                          const QuantTensor& weights, const PEConfig& cfg,
                          const ExecuteOptions& options) {
  if (layer.kind == LayerKind::MaxPool) {
    layer.validate();
    if (inputs.dims() != layer.input_dims()) {
      throw GeometryError(fmt::format("layer '{}': input dims do not match the descriptor",
                                      layer.name));
    }
    LayerResult result;
    const ConvGeometry g = layer.geometry();
    result.outputs = QuantTensor(layer.output_dims(), inputs.precision(),
                                 max_pool(inputs.values(), static_cast<std::size_t>(g.in_channels),
                                          g.output_positions(), layer.pool_window));
    const std::uint64_t bits =
        static_cast<std::uint64_t>(inputs.precision()) * (inputs.size() + result.outputs.size());
    result.report.dram_bytes = (bits + 7) / 8;
    return result;
  }
  return layer_execute(encode_layer(layer, inputs, weights, options.encoding, options.dsm), cfg,
                       options);
}

}  // namespace sbrsim
