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

#include "sbrsim/isa.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include "sbrsim/error.hpp"

namespace sbrsim {

namespace {

constexpr std::array<std::string_view, 15> kMnemonics{
    "nop",     "cfg_w",     "cfg_h",     "cfg_ic", "cfg_oc", "cfg_prec", "cfg_mode", "cfg_ibase",
    "cfg_wbase", "cfg_obase", "run",     "reset",  "cfg_spec", "sync",   "halt"};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::optional<long long> parse_int(std::string_view s) {
  long long v = 0;
  int base = 10;
  if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
    s.remove_prefix(2);
    base = 16;
  }
  if (s.empty()) return std::nullopt;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
  if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

std::string_view mnemonic(Opcode op) { return kMnemonics.at(static_cast<std::size_t>(op)); }

std::optional<Opcode> parse_mnemonic(std::string_view text) {
  const std::string t = lower(text);
  for (std::size_t i = 0; i < kMnemonics.size(); ++i) {
    if (kMnemonics[i] == t) return static_cast<Opcode>(i);
  }
  return std::nullopt;
}

bool is_valid_opcode(unsigned value) { return value < kMnemonics.size(); }

std::uint32_t encode_instruction(int target, int opcode, int operand) {
  if (target < 0 || target > kMaxTarget) throw RangeError(fmt::format("target {} exceeds 7 bits", target));
  if (opcode < 0 || !is_valid_opcode(static_cast<unsigned>(opcode))) {
    throw RangeError(fmt::format("opcode {:#x} is not defined", opcode));
  }
  if (operand < 0 || operand > 0xFFFF) throw RangeError(fmt::format("operand {} exceeds 16 bits", operand));
  return (static_cast<std::uint32_t>(target) << 25) | (static_cast<std::uint32_t>(opcode) << 21) |
         static_cast<std::uint32_t>(operand);
}

std::uint8_t decode_target(std::uint32_t word) { return static_cast<std::uint8_t>(word >> 25); }

Instruction decode_hierarchical(std::uint32_t word, int mpu_cores) {
  const std::uint8_t target = decode_target(word);
  if (target >= kTargetMpuBase && target - kTargetMpuBase >= mpu_cores) {
    throw ProgramError(fmt::format("word {:#010x}: no core behind target {:#x}", word, target));
  }
  // Second stage, inside the addressed core.
  if ((word >> 16) & 0x1F) throw ProgramError(fmt::format("word {:#010x}: reserved bits set", word));
  const unsigned op = (word >> 21) & 0xF;
  if (!is_valid_opcode(op)) throw ProgramError(fmt::format("word {:#010x}: unknown opcode {:#x}", word, op));
  return {target, static_cast<Opcode>(op), static_cast<std::uint16_t>(word & 0xFFFF)};
}

std::string target_name(std::uint8_t target) {
  if (target == kTargetBroadcast) return "all";
  if (target == kTargetDmu) return "dmu0";
  return fmt::format("mpu{}", target - kTargetMpuBase);
}

std::optional<std::uint8_t> parse_target(std::string_view text) {
  const std::string t = lower(text);
  if (t == "all") return kTargetBroadcast;
  if (t == "dmu0") return kTargetDmu;
  if (t.size() > 3 && t.compare(0, 3, "mpu") == 0) {
    const std::string_view digits = std::string_view(t).substr(3);
    if (digits.size() > 1 && digits[0] == '0') return std::nullopt;
    int idx = 0;
    auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), idx);
    if (ec != std::errc{} || p != digits.data() + digits.size()) return std::nullopt;
    if (idx < 0 || idx > kMaxTarget - kTargetMpuBase) return std::nullopt;
    return static_cast<std::uint8_t>(kTargetMpuBase + idx);
  }
  return std::nullopt;
}

Program assemble(std::string_view text) {
  Program prog;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::vector<std::string> tok;
    for (std::string t; fields >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    auto fail = [&](const std::string& why) {
      throw ProgramError(fmt::format("line {}: {}", lineno, why));
    };
    if (tok.size() == 1 && tok[0].size() > 1 && tok[0].back() == ':') {
      prog.labels.emplace_back(prog.words.size(), tok[0].substr(0, tok[0].size() - 1));
      continue;
    }
    if (tok.size() != 3) fail("expected '<target> <mnemonic> <operand>'");
    const auto target = parse_target(tok[0]);
    if (!target) fail(fmt::format("unknown target '{}'", tok[0]));
    const auto op = parse_mnemonic(tok[1]);
    if (!op) fail(fmt::format("unknown mnemonic '{}'", tok[1]));
    const auto operand = parse_int(tok[2]);
    if (!operand) fail(fmt::format("bad operand '{}'", tok[2]));
    if (*operand < 0 || *operand > 0xFFFF) fail(fmt::format("operand {} exceeds 16 bits", *operand));
    prog.words.push_back(encode_instruction(*target, static_cast<int>(*op), static_cast<int>(*operand)));
  }
  return prog;
}

std::string disassemble(std::uint32_t word) {
  const Instruction in = decode_hierarchical(word);
  return fmt::format("{} {} {}", target_name(in.target), mnemonic(in.opcode), in.operand);
}

std::string disassemble(const Program& program) {
  std::string out;
  std::size_t next_label = 0;
  for (std::size_t i = 0; i <= program.words.size(); ++i) {
    while (next_label < program.labels.size() && program.labels[next_label].first == i) {
      out += program.labels[next_label++].second + ":\n";
    }
    if (i < program.words.size()) out += disassemble(program.words[i]) + "\n";
  }
  return out;
}

void write_sbp(std::ostream& out, const Program& program) {
  for (std::uint32_t w : program.words) {
    const std::array<char, 4> b{static_cast<char>(w & 0xFF), static_cast<char>((w >> 8) & 0xFF),
                                static_cast<char>((w >> 16) & 0xFF),
                                static_cast<char>((w >> 24) & 0xFF)};
    out.write(b.data(), 4);
  }
  if (!out) throw FormatError("failed writing program");
}

Program read_sbp(std::istream& in) {
  Program prog;
  std::array<unsigned char, 4> b{};
  while (in.read(reinterpret_cast<char*>(b.data()), 4)) {
    prog.words.push_back(b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<std::uint32_t>(b[3]) << 24));
  }
  if (in.gcount() != 0) throw FormatError("program length is not a multiple of 4 bytes");
  return prog;
}

std::uint16_t pack_precision(const PrecisionField& f) {
  if (f.input_precision < 1 || f.input_precision > 31 || f.weight_precision < 1 ||
      f.weight_precision > 31 || f.slice_width < 0 || f.slice_width > 7) {
    throw RangeError("precision field out of range");
  }
  return static_cast<std::uint16_t>(f.input_precision | (f.weight_precision << 5) |
                                    (f.slice_width << 10));
}

PrecisionField unpack_precision(std::uint16_t v) {
  return {v & 0x1F, (v >> 5) & 0x1F, (v >> 10) & 0x7};
}

std::uint16_t pack_mode(const ModeField& f) {
  if (f.padding < 0 || f.padding > 7 || f.stride < 1 || f.stride > 7) {
    throw RangeError("padding or stride does not fit 3 bits");
  }
  return static_cast<std::uint16_t>(static_cast<int>(f.skip) |
                                    (f.accumulate == AccumulateMode::Chained ? 1 << 4 : 0) |
                                    (f.padding << 5) | (f.stride << 8));
}

ModeField unpack_mode(std::uint16_t v) {
  const int skip = v & 0xF;
  if (skip > static_cast<int>(SkipMode::InOutSkip)) {
    throw ProgramError(fmt::format("skip mode {} is not defined", skip));
  }
  if (v >> 11) throw ProgramError("CFG_MODE reserved operand bits set");
  ModeField f;
  f.skip = static_cast<SkipMode>(skip);
  f.accumulate = (v >> 4) & 1 ? AccumulateMode::Chained : AccumulateMode::Exact;
  f.padding = (v >> 5) & 0x7;
  f.stride = (v >> 8) & 0x7;
  return f;
}

std::uint16_t pack_spec(const SpecField& f) {
  if (f.candidates < 0 || f.candidates > 0xFF || f.pool_window < 0 || f.pool_window > 0x7F) {
    throw RangeError("speculation field out of range");
  }
  return static_cast<std::uint16_t>(f.candidates |
                                    (f.mode == SpeculationMode::MMPlusLM ? 1 << 8 : 0) |
                                    (f.pool_window << 9));
}

SpecField unpack_spec(std::uint16_t v) {
  SpecField f;
  f.candidates = v & 0xFF;
  f.mode = (v >> 8) & 1 ? SpeculationMode::MMPlusLM : SpeculationMode::MM;
  f.pool_window = v >> 9;
  return f;
}

int setup_length(const LayerDescriptor& layer) { return layer.pooled() ? 10 : 9; }

Program emit_layer_program(const LayerDescriptor& layer, int mpu_core, std::uint16_t input_base,
                           std::uint16_t weight_base, std::uint16_t output_base, int tiles,
                           AccumulateMode accumulate) {
  layer.validate();
  if (layer.kind != LayerKind::Conv2D && layer.kind != LayerKind::FullyConnected) {
    throw ProgramError("only convolution and fully connected layers are programmable");
  }
  const int target = kTargetMpuBase + mpu_core;
  Program p;
  auto emit = [&](Opcode op, int operand) {
    p.words.push_back(encode_instruction(target, static_cast<int>(op), operand));
  };
  emit(Opcode::CfgW, layer.in_width);
  emit(Opcode::CfgH, layer.in_height);
  emit(Opcode::CfgIc, layer.in_channels);
  emit(Opcode::CfgOc, layer.out_channels);
  emit(Opcode::CfgPrec, pack_precision({layer.input_slices.precision(),
                                        layer.weight_slices.precision(), layer.input_slices.width()}));
  emit(Opcode::CfgMode, pack_mode({layer.skip_mode, accumulate, layer.padding, layer.stride}));
  if (layer.pooled()) {
    emit(Opcode::CfgSpec, pack_spec({layer.speculation.candidates, layer.speculation.mode,
                                     layer.pool_window}));
  }
  emit(Opcode::CfgIbase, input_base);
  emit(Opcode::CfgWbase, weight_base);
  emit(Opcode::CfgObase, output_base);
  for (int t = 0; t < tiles; ++t) emit(Opcode::Run, 0);
  return p;
}

}  // namespace sbrsim
