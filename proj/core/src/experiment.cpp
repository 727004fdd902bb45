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

#include "sbrsim/experiment.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <thread>

#include "sbrsim/error.hpp"
#include "sbrsim/executor.hpp"
#include "sbrsim/isa.hpp"
#include "sbrsim/tensor_io.hpp"

namespace sbrsim {

using nlohmann::json;

namespace {

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                std::string_view where) {
  if (!obj.is_object()) throw FormatError(fmt::format("{} must be a JSON object", where));
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw FormatError(fmt::format("unknown key '{}' in {}", key, where));
    }
  }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
  auto it = obj.find(key);
  return it == obj.end() ? fallback : it->template get<T>();
}

OperandSource parse_operand(const json& j, const OperandSource& defaults,
                            const std::filesystem::path& base, std::string_view where) {
  check_keys(j, {"file", "distribution", "activation", "spread", "bias", "zero_fraction",
                 "calibration_precision"},
             where);
  OperandSource src = defaults;
  if (j.contains("file")) {
    std::filesystem::path p = j.at("file").get<std::string>();
    src.file = p.is_absolute() ? p : base / p;
    return src;
  }
  src.file.clear();
  SyntheticSpec& s = src.synthetic;
  if (j.contains("distribution")) s.distribution = parse_distribution(j.at("distribution").get<std::string>());
  if (j.contains("activation")) s.activation = parse_activation(j.at("activation").get<std::string>());
  s.spread = get_or(j, "spread", s.spread);
  s.bias = get_or(j, "bias", s.bias);
  if (j.contains("calibration_precision")) s.calibration_precision = j.at("calibration_precision").get<int>();
  if (j.contains("zero_fraction")) {
    if (j.at("zero_fraction").is_null()) {
      s.target_zero_fraction.reset();
    } else {
      s.target_zero_fraction = j.at("zero_fraction").get<double>();
    }
  }
  return src;
}

json operand_json(const OperandSource& s) {
  if (!s.file.empty()) return {{"file", s.file.generic_string()}};
  json j{{"distribution", to_string(s.synthetic.distribution)},
         {"activation", to_string(s.synthetic.activation)},
         {"spread", s.synthetic.spread},
         {"bias", s.synthetic.bias}};
  j["zero_fraction"] = s.synthetic.target_zero_fraction ? json(*s.synthetic.target_zero_fraction)
                                                        : json(nullptr);
  if (s.synthetic.calibration_precision) j["calibration_precision"] = *s.synthetic.calibration_precision;
  return j;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (layers.empty()) throw Error("experiment has no layers");
  if (precisions.empty() || skip_modes.empty()) throw Error("sweep lists must be non-empty");
  if (std::find(skip_modes.begin(), skip_modes.end(), SkipMode::InOutSkip) != skip_modes.end() &&
      spec_k.empty()) {
    throw Error("spec.k must list at least one candidate count");
  }
  for (int k : spec_k) {
    if (k < 1) throw Error(fmt::format("spec.k entry {} must be positive", k));
  }
  for (int p : precisions) (void)SliceConfig::for_precision(slice_width, p);
  if (parallelism < 1) throw Error("parallelism must be at least 1");
  pe.validate(slice_width);
  mesh.validate();
  std::set<std::string> names;
  for (const auto& lc : layers) {
    if (!names.insert(lc.layer.name).second) {
      throw Error(fmt::format("duplicate layer name '{}'", lc.layer.name));
    }
    for (const OperandSource* src : {&lc.input, &lc.weight}) {
      if (!src->file.empty() && !std::filesystem::exists(src->file)) {
        throw Error(fmt::format("layer '{}': tensor file '{}' does not exist", lc.layer.name,
                                src->file.string()));
      }
    }
  }
}

ExperimentConfig parse_experiment_config(const json& doc, const std::filesystem::path& base) {
  check_keys(doc,
             {"name", "seed", "slice_width", "precisions", "skip_modes", "spec", "accumulate", "pe",
              "mesh", "allocation", "energy", "dsm", "parallelism", "input", "weight", "layers"},
             "config");
  ExperimentConfig c;
  if (!doc.contains("seed")) throw FormatError("config requires a seed");
  c.seed = doc.at("seed").get<std::uint64_t>();
  c.name = get_or<std::string>(doc, "name", c.name);
  c.slice_width = get_or(doc, "slice_width", c.slice_width);
  if (doc.contains("precisions")) c.precisions = doc.at("precisions").get<std::vector<int>>();
  if (doc.contains("skip_modes")) {
    c.skip_modes.clear();
    for (const auto& m : doc.at("skip_modes")) c.skip_modes.push_back(parse_skip_mode(m.get<std::string>()));
  }
  SpeculationMode spec_mode = SpeculationMode::MM;
  if (doc.contains("spec")) {
    const json& s = doc.at("spec");
    check_keys(s, {"k", "mode"}, "spec");
    if (s.contains("k")) {
      c.spec_k = s.at("k").is_array() ? s.at("k").get<std::vector<int>>()
                                      : std::vector<int>{s.at("k").get<int>()};
    }
    if (s.contains("mode")) spec_mode = parse_speculation_mode(s.at("mode").get<std::string>());
  }
  if (doc.contains("accumulate")) c.accumulate = parse_accumulate_mode(doc.at("accumulate").get<std::string>());
  if (doc.contains("pe")) {
    const json& p = doc.at("pe");
    check_keys(p, {"arrays", "columns", "units", "acc_width", "latch_depth", "pes_per_mpu",
                   "drain_latency"},
               "pe");
    c.pe.arrays = get_or(p, "arrays", c.pe.arrays);
    c.pe.columns = get_or(p, "columns", c.pe.columns);
    c.pe.units = get_or(p, "units", c.pe.units);
    c.pe.acc_width = get_or(p, "acc_width", c.pe.acc_width);
    c.pe.latch_depth = get_or(p, "latch_depth", c.pe.latch_depth);
    c.pe.pes_per_mpu = get_or(p, "pes_per_mpu", c.pe.pes_per_mpu);
    c.pe.drain_latency = get_or(p, "drain_latency", c.pe.drain_latency);
  }
  if (doc.contains("mesh")) {
    const json& m = doc.at("mesh");
    check_keys(m, {"mpu_cores", "dmu_cores", "pe_arrays_per_core", "link_width_bits", "columns"},
               "mesh");
    c.mesh.mpu_cores = get_or(m, "mpu_cores", c.mesh.mpu_cores);
    c.mesh.dmu_cores = get_or(m, "dmu_cores", c.mesh.dmu_cores);
    c.mesh.pe_arrays_per_core = get_or(m, "pe_arrays_per_core", c.mesh.pe_arrays_per_core);
    c.mesh.link_width_bits = get_or(m, "link_width_bits", c.mesh.link_width_bits);
    c.mesh.columns = get_or(m, "columns", c.mesh.columns);
  }
  if (doc.contains("allocation")) {
    c.allocation = parse_allocation_pattern(doc.at("allocation").get<std::string>());
  }
  if (doc.contains("energy")) {
    const json& e = doc.at("energy");
    check_keys(e, {"mac", "rf", "sram", "dram_byte", "noc_hop_bit"}, "energy");
    c.energy.mac = get_or(e, "mac", c.energy.mac);
    c.energy.rf = get_or(e, "rf", c.energy.rf);
    c.energy.sram = get_or(e, "sram", c.energy.sram);
    c.energy.dram_byte = get_or(e, "dram_byte", c.energy.dram_byte);
    c.energy.noc_hop_bit = get_or(e, "noc_hop_bit", c.energy.noc_hop_bit);
  }
  if (doc.contains("dsm")) {
    const json& d = doc.at("dsm");
    check_keys(d, {"min_skip_fraction"}, "dsm");
    c.dsm.min_skip_fraction = get_or(d, "min_skip_fraction", c.dsm.min_skip_fraction);
  }
  c.parallelism = get_or(doc, "parallelism", c.parallelism);

  OperandSource default_input;
  default_input.synthetic.activation = Activation::Relu;
  OperandSource default_weight;
  if (doc.contains("input")) default_input = parse_operand(doc.at("input"), default_input, base, "input");
  if (doc.contains("weight")) default_weight = parse_operand(doc.at("weight"), default_weight, base, "weight");

  if (!doc.contains("layers") || !doc.at("layers").is_array()) {
    throw FormatError("config requires a layers array");
  }
  for (const json& l : doc.at("layers")) {
    check_keys(l,
               {"name", "kind", "in_channels", "in_height", "in_width", "out_channels", "kernel",
                "kernel_h", "kernel_w", "stride", "padding", "pool_window", "spec_mode",
                "input", "weight"},
               "layer");
    LayerConfig lc;
    LayerDescriptor& d = lc.layer;
    d.name = l.at("name").get<std::string>();
    d.kind = parse_layer_kind(get_or<std::string>(l, "kind", "conv2d"));
    d.in_channels = l.at("in_channels").get<int>();
    d.in_height = get_or(l, "in_height", 1);
    d.in_width = get_or(l, "in_width", 1);
    d.out_channels = get_or(l, "out_channels", d.kind == LayerKind::MaxPool ? d.in_channels : 1);
    const int kernel = get_or(l, "kernel", 1);
    d.kernel_h = get_or(l, "kernel_h", kernel);
    d.kernel_w = get_or(l, "kernel_w", kernel);
    d.stride = get_or(l, "stride", 1);
    d.padding = get_or(l, "padding", 0);
    d.pool_window = get_or(l, "pool_window", 0);
    d.speculation.mode =
        l.contains("spec_mode") ? parse_speculation_mode(l.at("spec_mode").get<std::string>()) : spec_mode;
    d.speculation.candidates = 1;
    lc.input = l.contains("input") ? parse_operand(l.at("input"), default_input, base, "layer input")
                                   : default_input;
    lc.weight = l.contains("weight") ? parse_operand(l.at("weight"), default_weight, base, "layer weight")
                                     : default_weight;
    d.input_slices = d.weight_slices = SliceConfig::for_precision(c.slice_width, c.precisions.front());
    d.validate();
    c.layers.push_back(std::move(lc));
  }
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot open config '{}'", path.string()));
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(fmt::format("config '{}': {}", path.string(), e.what()));
  }
  return parse_experiment_config(doc, path.parent_path());
}

json to_json(const ExperimentConfig& c) {
  json modes = json::array();
  for (auto m : c.skip_modes) modes.push_back(to_string(m));
  json layers = json::array();
  for (const auto& lc : c.layers) {
    const LayerDescriptor& d = lc.layer;
    layers.push_back({{"name", d.name},
                      {"kind", to_string(d.kind)},
                      {"in_channels", d.in_channels},
                      {"in_height", d.in_height},
                      {"in_width", d.in_width},
                      {"out_channels", d.out_channels},
                      {"kernel_h", d.kernel_h},
                      {"kernel_w", d.kernel_w},
                      {"stride", d.stride},
                      {"padding", d.padding},
                      {"pool_window", d.pool_window},
                      {"spec_mode", to_string(d.speculation.mode)},
                      {"input", operand_json(lc.input)},
                      {"weight", operand_json(lc.weight)}});
  }
  return {{"name", c.name},
          {"seed", c.seed},
          {"slice_width", c.slice_width},
          {"precisions", c.precisions},
          {"skip_modes", modes},
          {"spec", {{"k", c.spec_k}}},
          {"accumulate", to_string(c.accumulate)},
          {"pe",
           {{"arrays", c.pe.arrays},
            {"columns", c.pe.columns},
            {"units", c.pe.units},
            {"acc_width", c.pe.acc_width},
            {"latch_depth", c.pe.latch_depth},
            {"pes_per_mpu", c.pe.pes_per_mpu},
            {"drain_latency", c.pe.drain_latency}}},
          {"mesh",
           {{"mpu_cores", c.mesh.mpu_cores},
            {"dmu_cores", c.mesh.dmu_cores},
            {"pe_arrays_per_core", c.mesh.pe_arrays_per_core},
            {"link_width_bits", c.mesh.link_width_bits},
            {"columns", c.mesh.columns}}},
          {"allocation", to_string(c.allocation)},
          {"energy",
           {{"mac", c.energy.mac},
            {"rf", c.energy.rf},
            {"sram", c.energy.sram},
            {"dram_byte", c.energy.dram_byte},
            {"noc_hop_bit", c.energy.noc_hop_bit}}},
          {"dsm", {{"min_skip_fraction", c.dsm.min_skip_fraction}}},
          {"parallelism", c.parallelism},
          {"layers", layers}};
}

std::vector<SweepPoint> sweep_points(const ExperimentConfig& c) {
  std::vector<SweepPoint> pts;
  for (int p : c.precisions) {
    for (SkipMode m : c.skip_modes) {
      if (m == SkipMode::InOutSkip) {
        for (int k : c.spec_k) pts.push_back({p, m, k});
      } else {
        pts.push_back({p, m, 0});
      }
    }
  }
  return pts;
}

int baseline_precision(const ExperimentConfig& c) {
  if ((7 - 1) % (c.slice_width - 1) == 0) return 7;
  return *std::min_element(c.precisions.begin(), c.precisions.end());
}

std::string output_hash(const QuantTensor& t) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::int64_t v : t.values()) {
    auto u = static_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) {
      h ^= (u >> (8 * b)) & 0xFF;
      h *= 0x100000001b3ull;
    }
  }
  return fmt::format("{:016x}", h);
}

namespace {

struct Operands {
  std::optional<QuantTensor> input;
  std::optional<QuantTensor> weight;
  std::string error;
};

QuantTensor make_operand(const OperandSource& src, std::vector<std::size_t> dims, int precision,
                         int calibration_precision, std::uint64_t seed) {
  if (!src.file.empty()) {
    QuantTensor t = load_tensor(src.file);
    if (t.dims() != dims) throw GeometryError(fmt::format("'{}' has the wrong dims", src.file.string()));
    if (t.precision() != precision) {
      throw GeometryError(fmt::format("'{}' holds {}-bit values, sweep point needs {}",
                                      src.file.string(), t.precision(), precision));
    }
    return t;
  }
  SyntheticSpec spec = src.synthetic;
  if (!spec.calibration_precision) spec.calibration_precision = calibration_precision;
  return generate_synthetic_tensor(spec, std::move(dims), precision, seed);
}

template <typename Fn>
void parallel_for(std::size_t count, int parallelism, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(parallelism));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

OperandStats operand_stats(const EncodedLayer& enc, SkipMode mode, bool input,
                           const QuantTensor& values, const SliceConfig& slices) {
  OperandStats s;
  const SparsityStats& st = input ? enc.input_stats : enc.weight_stats;
  s.element_zero_fraction = st.element_zero_fraction;
  s.sbr_zero_digit_fraction = st.total_zero_fraction;
  s.zero_subword_fraction = st.zero_subword_fraction;
  s.conventional_zero_digit_fraction =
      sparsity_stats(encode_conventional(values, slices), input ? PackAxis::Innermost : PackAxis::Outermost)
          .total_zero_fraction;
  std::uint64_t stored = 0;
  for (auto b : stored_plane_bits(enc, mode, input)) stored += b;
  const std::uint64_t original = static_cast<std::uint64_t>(slices.precision()) * values.size();
  s.compression_ratio = stored ? static_cast<double>(original) / static_cast<double>(stored) : kInfiniteRatio;
  return s;
}

PointResult run_point(const ExperimentConfig& cfg, const LayerConfig& lc, std::size_t layer_index,
                      const SweepPoint& pt, const Operands& ops) {
  PointResult row;
  row.layer_index = layer_index;
  row.layer_name = lc.layer.name;
  row.kind = lc.layer.kind;
  row.point = pt;
  try {
    if (!ops.error.empty()) throw Error(ops.error);
    LayerDescriptor layer = lc.layer;
    layer.input_slices = layer.weight_slices = SliceConfig::for_precision(cfg.slice_width, pt.precision);
    layer.skip_mode = pt.mode;
    if (pt.mode == SkipMode::InOutSkip && layer.kind != LayerKind::MaxPool) {
      layer.speculation.candidates = pt.spec_k;
    }
    layer.validate();
    ExecuteOptions options;
    options.accumulate = cfg.accumulate;
    options.dsm = cfg.dsm;

    const QuantTensor& in = *ops.input;
    if (layer.kind == LayerKind::MaxPool) {
      LayerResult r = layer_execute(layer, in, QuantTensor{}, cfg.pe, options);
      row.report = r.report;
      row.output_hash = output_hash(r.outputs);
      const SliceTensor st = encode_sbr(in, layer.input_slices);
      const SparsityStats ss = sparsity_stats(st);
      row.input.element_zero_fraction = ss.element_zero_fraction;
      row.input.sbr_zero_digit_fraction = ss.total_zero_fraction;
      row.input.zero_subword_fraction = ss.zero_subword_fraction;
      row.input.conventional_zero_digit_fraction =
          sparsity_stats(encode_conventional(in, layer.input_slices)).total_zero_fraction;
      row.input.compression_ratio = 1.0;
    } else {
      const QuantTensor& wt = *ops.weight;
      const EncodedLayer enc = encode_layer(layer, in, wt, Encoding::Sbr, cfg.dsm);
      constexpr std::uint16_t kInputAddr = 0x0000, kWeightAddr = 0x1000, kOutputAddr = 0x2000;
      const Program program =
          emit_layer_program(layer, 0, kInputAddr, kWeightAddr, kOutputAddr, 1, cfg.accumulate);
      TensorMemory memory;
      memory.emplace(kInputAddr, in);
      memory.emplace(kWeightAddr, wt);
      ExecutionTrace trace = execute_program(program, cfg.mesh.mpu_cores, memory, cfg.pe, options);
      ExecutionOutcome& out = trace.outcomes.at(0);
      row.fetches = trace.fetches;
      row.report = std::move(out.report);
      row.output_hash = output_hash(out.outputs);
      row.speculative = out.speculative;
      if (out.speculative) {
        row.speculation = out.speculation;
        row.spec_output_hash = output_hash(out.speculative_outputs);
      }

      OperandBytes sizes;
      for (auto b : stored_plane_bits(enc, pt.mode, true)) sizes.input_planes.push_back((b + 7) / 8);
      for (auto b : stored_plane_bits(enc, pt.mode, false)) sizes.weight_planes.push_back((b + 7) / 8);
      sizes.outputs = (element_count(layer.output_dims()) *
                           static_cast<std::uint64_t>(output_precision(enc)) + 7) / 8;
      const Assignment assignment = allocate_workload(layer, cfg.mesh, cfg.allocation, sizes);
      row.transfers = simulate_bi_noc_transfers(assignment, cfg.mesh);
      row.report.noc_hop_bits = row.transfers.total_hop_bits();

      row.input = operand_stats(enc, pt.mode, true, in, layer.input_slices);
      row.weight = operand_stats(enc, pt.mode, false, wt, layer.weight_slices);
    }
    row.energy = row.report.energy(cfg.energy);
    row.ok = true;
  } catch (const std::exception& e) {
    row.ok = false;
    row.error = e.what();
  }
  return row;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult result;
  result.config = cfg;
  result.points = sweep_points(cfg);
  const int base_p = baseline_precision(cfg);

  std::vector<int> precisions = cfg.precisions;
  if (std::find(precisions.begin(), precisions.end(), base_p) == precisions.end()) {
    precisions.push_back(base_p);
  }
  const std::size_t L = cfg.layers.size();
  const std::size_t P = precisions.size();
  auto precision_slot = [&](int p) {
    return static_cast<std::size_t>(std::find(precisions.begin(), precisions.end(), p) -
                                    precisions.begin());
  };

  std::vector<Operands> operands(L * P);
  parallel_for(L * P, cfg.parallelism, [&](std::size_t q) {
    const std::size_t l = q / P;
    const int p = precisions[q % P];
    const LayerConfig& lc = cfg.layers[l];
    Operands& ops = operands[q];
    try {
      ops.input = make_operand(lc.input, lc.layer.input_dims(), p, base_p,
                               derive_seed(cfg.seed, l, static_cast<std::uint64_t>(p), 0));
      if (lc.layer.has_weights()) {
        ops.weight = make_operand(lc.weight, lc.layer.weight_dims(), p, base_p,
                                  derive_seed(cfg.seed, l, static_cast<std::uint64_t>(p), 1));
      }
    } catch (const std::exception& e) {
      ops.error = fmt::format("operand generation failed: {}", e.what());
    }
  });

  const SweepPoint baseline_point{base_p, SkipMode::NoSkip, 0};
  const auto in_sweep = std::find(result.points.begin(), result.points.end(), baseline_point);
  const bool hidden_baseline = in_sweep == result.points.end();
  const std::size_t per_layer = result.points.size() + (hidden_baseline ? 1 : 0);

  std::vector<PointResult> rows(L * per_layer);
  parallel_for(rows.size(), cfg.parallelism, [&](std::size_t q) {
    const std::size_t l = q / per_layer;
    const std::size_t k = q % per_layer;
    const SweepPoint& pt = k < result.points.size() ? result.points[k] : baseline_point;
    rows[q] = run_point(cfg, cfg.layers[l], l, pt, operands[l * P + precision_slot(pt.precision)]);
  });

  const std::size_t base_idx =
      hidden_baseline ? result.points.size()
                      : static_cast<std::size_t>(in_sweep - result.points.begin());
  for (std::size_t l = 0; l < L; ++l) {
    const PointResult& base = rows[l * per_layer + base_idx];
    for (std::size_t k = 0; k < result.points.size(); ++k) {
      PointResult row = std::move(rows[l * per_layer + k]);
      if (row.ok && base.ok) {
        row.speedup = row.report.total_cycles
                          ? static_cast<double>(base.report.total_cycles) / row.report.total_cycles
                          : 1.0;
        row.energy_efficiency = row.energy > 0 ? base.energy / row.energy : 1.0;
        row.mac_scaling = row.report.nominal_macs
                              ? static_cast<double>(base.report.nominal_macs) / row.report.nominal_macs
                              : 1.0;
      }
      result.rows.push_back(std::move(row));
    }
  }
  return result;
}

}  // namespace sbrsim
