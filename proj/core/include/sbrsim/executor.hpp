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

#include <cstdint>
#include <map>
#include <vector>

#include <nlohmann/json.hpp>

#include "sbrsim/codec.hpp"
#include "sbrsim/isa.hpp"
#include "sbrsim/pe.hpp"
#include "sbrsim/speculation.hpp"

namespace sbrsim {

/// Tensors addressed by the base registers.
using TensorMemory = std::map<std::uint16_t, QuantTensor>;

struct CoreState {
  std::uint16_t width = 0;
  std::uint16_t height = 0;
  std::uint16_t in_channels = 0;
  std::uint16_t out_channels = 0;
  std::uint16_t precision = 0;
  std::uint16_t mode = 0;
  std::uint16_t input_base = 0;
  std::uint16_t weight_base = 0;
  std::uint16_t output_base = 0;
  std::uint16_t spec = 0;
  std::uint16_t written = 0;  ///< bit per CFG opcode seen since reset
  std::uint64_t runs = 0;
  std::uint64_t fetches = 0;  ///< words delivered to this core
  std::uint64_t cycles = 0;

  bool configured() const;
  friend bool operator==(const CoreState&, const CoreState&) = default;
};

struct ExecutionTrace {
  std::uint64_t fetches = 0;  ///< words decoded by the top-level decoder
  CoreState dmu;
  std::vector<CoreState> mpus;
  std::vector<nlohmann::json> records;  ///< one per decoded word and per core completion
  std::uint64_t total_cycles = 0;
  bool halted = false;
  std::vector<ExecutionOutcome> outcomes;  ///< per completed tile, in completion order
};

/// Builds the layer a configured core would run on its current tile.
LayerDescriptor core_layer(const CoreState& core, const TensorMemory& memory);

/// Runs the program to HALT or its last word. RUN executes the addressed
/// cores' tiles in core order and writes outputs to memory. `options`
/// supplies the DSM policy; CFG_MODE supplies the accumulate mode.
ExecutionTrace execute_program(const Program& program, int mpu_cores, TensorMemory& memory,
                               const PEConfig& cfg = {}, const ExecuteOptions& options = {});

}  // namespace sbrsim
