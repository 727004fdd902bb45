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
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sbrsim/noc.hpp"
#include "sbrsim/pe.hpp"
#include "sbrsim/speculation.hpp"
#include "sbrsim/synthetic.hpp"

namespace sbrsim {

struct OperandSource {
  std::filesystem::path file;  ///< SBT1 tensor; empty means synthetic
  SyntheticSpec synthetic;
};

struct LayerConfig {
  LayerDescriptor layer;  ///< slice configs are set per sweep precision
  OperandSource input;
  OperandSource weight;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::uint64_t seed = 0;
  int slice_width = 4;
  std::vector<int> precisions{7};
  std::vector<SkipMode> skip_modes{SkipMode::NoSkip, SkipMode::InputSkip, SkipMode::HybridSkip,
                                   SkipMode::InOutSkip};
  std::vector<int> spec_k{4};
  AccumulateMode accumulate = AccumulateMode::Exact;
  PEConfig pe;
  MeshConfig mesh;
  AllocationPattern allocation = AllocationPattern::InputReuse;
  EnergyCosts energy;
  DsmPolicy dsm;
  int parallelism = 1;
  std::vector<LayerConfig> layers;

  /// Throws Error when the config cannot run.
  void validate() const;
};

/// Parses the JSON document; relative tensor paths resolve against `base_dir`.
/// The seed is mandatory.
ExperimentConfig parse_experiment_config(const nlohmann::json& doc,
                                         const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& config);

struct SweepPoint {
  int precision = 7;
  SkipMode mode = SkipMode::NoSkip;
  int spec_k = 0;  ///< 0 outside InOutSkip

  friend bool operator==(const SweepPoint&, const SweepPoint&) = default;
};

/// Precisions × modes, with InOutSkip expanded over spec_k.
std::vector<SweepPoint> sweep_points(const ExperimentConfig& config);

/// Baseline of the speedup columns: NoSkip at 7 bits, or at the lowest
/// swept precision when 7 bits is off the slice grid.
int baseline_precision(const ExperimentConfig& config);

struct OperandStats {
  double element_zero_fraction = 0.0;
  double sbr_zero_digit_fraction = 0.0;
  double conventional_zero_digit_fraction = 0.0;
  double zero_subword_fraction = 0.0;
  double compression_ratio = 0.0;  ///< original fixed-point bits / stored bits
};

struct PointResult {
  std::size_t layer_index = 0;
  std::string layer_name;
  LayerKind kind = LayerKind::Conv2D;
  SweepPoint point;
  bool ok = false;
  std::string error;

  CycleEnergyReport report;
  double energy = 0.0;
  TransferLog transfers;
  std::uint64_t fetches = 0;
  bool speculative = false;
  SpeculationStats speculation;
  std::string output_hash;
  std::string spec_output_hash;
  OperandStats input;
  OperandStats weight;

  double speedup = 0.0;
  double energy_efficiency = 0.0;
  double mac_scaling = 0.0;  ///< baseline nominal MACs / nominal MACs
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<SweepPoint> points;
  std::vector<PointResult> rows;  ///< layer-major, then sweep order
};

/// FNV-1a over the little-endian bytes of every value, as 16 hex digits.
std::string output_hash(const QuantTensor& tensor);

ExperimentResult run_experiment(const ExperimentConfig& config);

}  // namespace sbrsim
