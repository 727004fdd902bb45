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
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sbrsim/layer.hpp"

namespace sbrsim {

// Instruction word: [31:25] target, [24:21] opcode, [20:16] reserved (zero),
// [15:0] operand.
enum class Opcode : std::uint8_t {
  Nop = 0x0,
  CfgW = 0x1,
  CfgH = 0x2,
  CfgIc = 0x3,
  CfgOc = 0x4,
  CfgPrec = 0x5,
  CfgMode = 0x6,
  CfgIbase = 0x7,
  CfgWbase = 0x8,
  CfgObase = 0x9,
  Run = 0xA,
  Reset = 0xB,
  CfgSpec = 0xC,
  Sync = 0xD,
  Halt = 0xE,
};

inline constexpr std::uint8_t kTargetBroadcast = 0x00;
inline constexpr std::uint8_t kTargetDmu = 0x01;
inline constexpr std::uint8_t kTargetMpuBase = 0x02;
inline constexpr int kMaxTarget = 0x7F;

struct Instruction {
  std::uint8_t target = 0;
  Opcode opcode = Opcode::Nop;
  std::uint16_t operand = 0;

  friend bool operator==(const Instruction&, const Instruction&) = default;
};

std::string_view mnemonic(Opcode op);
std::optional<Opcode> parse_mnemonic(std::string_view text);
bool is_valid_opcode(unsigned value);

/// Throws RangeError when a field does not fit its slot.
std::uint32_t encode_instruction(int target, int opcode, int operand);
inline std::uint32_t encode_instruction(const Instruction& in) {
  return encode_instruction(in.target, static_cast<int>(in.opcode), in.operand);
}

/// First decode stage: the routing field.
std::uint8_t decode_target(std::uint32_t word);

/// Both stages. `mpu_cores` bounds the valid target ids.
/// Throws ProgramError on reserved bits, unknown opcodes, or unknown targets.
Instruction decode_hierarchical(std::uint32_t word, int mpu_cores = kMaxTarget - kTargetMpuBase + 1);

std::string target_name(std::uint8_t target);
std::optional<std::uint8_t> parse_target(std::string_view text);

struct Program {
  std::vector<std::uint32_t> words;
  std::vector<std::pair<std::size_t, std::string>> labels;  ///< (word index, name)

  friend bool operator==(const Program&, const Program&) = default;
};

/// One `<target> <mnemonic> <operand>` per line, `name:` labels, `#` comments.
Program assemble(std::string_view text);
std::string disassemble(const Program& program);
std::string disassemble(std::uint32_t word);

void write_sbp(std::ostream& out, const Program& program);
Program read_sbp(std::istream& in);

// Operand packings.
struct PrecisionField {
  int input_precision = 7;   ///< [4:0]
  int weight_precision = 7;  ///< [9:5]
  int slice_width = 4;       ///< [12:10]
};
std::uint16_t pack_precision(const PrecisionField& f);
PrecisionField unpack_precision(std::uint16_t operand);

struct ModeField {
  SkipMode skip = SkipMode::NoSkip;              ///< [3:0]
  AccumulateMode accumulate = AccumulateMode::Exact;  ///< [4]
  int padding = 0;                               ///< [7:5]
  int stride = 1;                                ///< [10:8]
};
std::uint16_t pack_mode(const ModeField& f);
ModeField unpack_mode(std::uint16_t operand);

struct SpecField {
  int candidates = 4;                            ///< [7:0]
  SpeculationMode mode = SpeculationMode::MM;    ///< [8]
  int pool_window = 0;                           ///< [15:9]
};
std::uint16_t pack_spec(const SpecField& f);
SpecField unpack_spec(std::uint16_t operand);

/// Configuration-plus-run program for `tiles` identical tiles on one core.
/// Tensors sit at consecutive addresses from each base; RUN advances the
/// input and output bases by one.
Program emit_layer_program(const LayerDescriptor& layer, int mpu_core, std::uint16_t input_base,
                           std::uint16_t weight_base, std::uint16_t output_base, int tiles,
                           AccumulateMode accumulate = AccumulateMode::Exact);

/// Number of configuration words emit_layer_program places before the RUNs.
int setup_length(const LayerDescriptor& layer);

}  // namespace sbrsim
