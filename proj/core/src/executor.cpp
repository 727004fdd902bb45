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

#include "sbrsim/executor.hpp"

#include <fmt/format.h>

#include "sbrsim/error.hpp"

namespace sbrsim {

namespace {

constexpr std::uint16_t kRequired =
    (1u << static_cast<int>(Opcode::CfgW)) | (1u << static_cast<int>(Opcode::CfgH)) |
    (1u << static_cast<int>(Opcode::CfgIc)) | (1u << static_cast<int>(Opcode::CfgOc)) |
    (1u << static_cast<int>(Opcode::CfgPrec)) | (1u << static_cast<int>(Opcode::CfgMode)) |
    (1u << static_cast<int>(Opcode::CfgIbase)) | (1u << static_cast<int>(Opcode::CfgWbase)) |
    (1u << static_cast<int>(Opcode::CfgObase));

void configure(CoreState& c, Opcode op, std::uint16_t v) {
  switch (op) {
    case Opcode::CfgW: c.width = v; break;
    case Opcode::CfgH: c.height = v; break;
    case Opcode::CfgIc: c.in_channels = v; break;
    case Opcode::CfgOc: c.out_channels = v; break;
    case Opcode::CfgPrec: c.precision = v; break;
    case Opcode::CfgMode: c.mode = v; break;
    case Opcode::CfgIbase: c.input_base = v; break;
    case Opcode::CfgWbase: c.weight_base = v; break;
    case Opcode::CfgObase: c.output_base = v; break;
    case Opcode::CfgSpec: c.spec = v; break;
    default: return;
  }
  c.written = static_cast<std::uint16_t>(c.written | (1u << static_cast<int>(op)));
}

const QuantTensor& fetch_tensor(const TensorMemory& memory, std::uint16_t addr, const char* what) {
  auto it = memory.find(addr);
  if (it == memory.end()) {
    throw ProgramError(fmt::format("{} address {:#06x} holds no tensor", what, addr));
  }
  return it->second;
}

}  // namespace

bool CoreState::configured() const { return (written & kRequired) == kRequired; }

LayerDescriptor core_layer(const CoreState& c, const TensorMemory& memory) {
  if (!c.configured()) throw ProgramError("RUN before the core was configured");
  const QuantTensor& weights = fetch_tensor(memory, c.weight_base, "weight");
  const PrecisionField prec = unpack_precision(c.precision);
  const ModeField mode = unpack_mode(c.mode);
  LayerDescriptor layer;
  layer.name = "tile";
  layer.in_channels = c.in_channels;
  layer.out_channels = c.out_channels;
  layer.in_height = c.height;
  layer.in_width = c.width;
  layer.stride = mode.stride;
  layer.padding = mode.padding;
  layer.skip_mode = mode.skip;
  const auto& wd = weights.dims();
  if (wd.size() == 2) {
    layer.kind = LayerKind::FullyConnected;
  } else if (wd.size() == 4) {
    layer.kernel_h = static_cast<int>(wd[2]);
    layer.kernel_w = static_cast<int>(wd[3]);
  } else {
    throw ProgramError("weight tensor must be [OC, IC] or [OC, IC, KH, KW]");
  }
  layer.input_slices = SliceConfig::for_precision(prec.slice_width, prec.input_precision);
  layer.weight_slices = SliceConfig::for_precision(prec.slice_width, prec.weight_precision);
  if (c.written & (1u << static_cast<int>(Opcode::CfgSpec))) {
    const SpecField spec = unpack_spec(c.spec);
    layer.pool_window = spec.pool_window;
    layer.speculation.candidates = spec.candidates;
    layer.speculation.mode = spec.mode;
  }
  layer.validate();
  return layer;
}

ExecutionTrace execute_program(const Program& program, int mpu_cores, TensorMemory& memory,
                               const PEConfig& cfg, const ExecuteOptions& base_options) {
  ExecutionTrace trace;
  trace.mpus.resize(static_cast<std::size_t>(mpu_cores));

  auto run_core = [&](int idx) {
    CoreState& core = trace.mpus[static_cast<std::size_t>(idx)];
    const LayerDescriptor layer = core_layer(core, memory);
    const QuantTensor& inputs = fetch_tensor(memory, core.input_base, "input");
    const QuantTensor& weights = fetch_tensor(memory, core.weight_base, "weight");
    ExecuteOptions options = base_options;
    options.accumulate = unpack_mode(core.mode).accumulate;
    const EncodedLayer enc = encode_layer(layer, inputs, weights, options.encoding, options.dsm);
    ExecutionOutcome out = execute_layer(enc, cfg, options);
    const std::uint64_t tile = core.runs;
    memory.insert_or_assign(core.output_base,
                            out.speculative ? out.speculative_outputs : out.outputs);
    core.cycles += out.report.total_cycles;
    trace.total_cycles += out.report.total_cycles;
    ++core.runs;
    trace.records.push_back({{"kind", "complete"},
                             {"core", target_name(static_cast<std::uint8_t>(kTargetMpuBase + idx))},
                             {"tile", tile},
                             {"input_base", core.input_base},
                             {"output_base", core.output_base},
                             {"cycles", out.report.total_cycles},
                             {"mac_executed", out.report.mac_executed}});
    trace.outcomes.push_back(std::move(out));
    // The core generates the next tile's addresses itself.
    ++core.input_base;
    ++core.output_base;
  };

  for (std::size_t pc = 0; pc < program.words.size(); ++pc) {
    const Instruction in = decode_hierarchical(program.words[pc], mpu_cores);
    ++trace.fetches;
    trace.records.push_back({{"kind", "fetch"},
                             {"index", pc},
                             {"word", fmt::format("{:#010x}", program.words[pc])},
                             {"target", target_name(in.target)},
                             {"op", mnemonic(in.opcode)},
                             {"operand", in.operand}});

    std::vector<CoreState*> cores;
    std::vector<int> mpu_ids;
    if (in.target == kTargetBroadcast || in.target == kTargetDmu) cores.push_back(&trace.dmu);
    for (int i = 0; i < mpu_cores; ++i) {
      if (in.target == kTargetBroadcast || in.target == kTargetMpuBase + i) {
        cores.push_back(&trace.mpus[static_cast<std::size_t>(i)]);
        mpu_ids.push_back(i);
      }
    }
    for (CoreState* c : cores) ++c->fetches;

    switch (in.opcode) {
      case Opcode::Nop:
        break;
      case Opcode::Reset:
        for (CoreState* c : cores) {
          const std::uint64_t fetched = c->fetches;
          *c = CoreState{};
          c->fetches = fetched;
        }
        break;
      case Opcode::Run:
        if (in.target == kTargetDmu) break;
        for (int i : mpu_ids) run_core(i);
        break;
      case Opcode::Sync:
        trace.records.push_back({{"kind", "sync"}, {"index", pc}});
        break;
      case Opcode::Halt:
        trace.halted = true;
        return trace;
      default:
        for (CoreState* c : cores) configure(*c, in.opcode, in.operand);
        break;
    }
  }
  return trace;
}

}  // namespace sbrsim
