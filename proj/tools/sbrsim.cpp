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

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "sbrsim/compression.hpp"
#include "sbrsim/error.hpp"
#include "sbrsim/executor.hpp"
#include "sbrsim/experiment.hpp"
#include "sbrsim/isa.hpp"
#include "sbrsim/report.hpp"
#include "sbrsim/tensor_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sbrsim;

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "out";
  std::string format = "text";
};

Encoding parse_encoding(const std::string& s) {
  if (s == "sbr") return Encoding::Sbr;
  if (s == "conventional") return Encoding::Conventional;
  if (s == "conventional_aligned") return Encoding::ConventionalAligned;
  throw Error(fmt::format("unknown encoding '{}'", s));
}

PackAxis parse_axis(const std::string& s) {
  if (s == "inner") return PackAxis::Innermost;
  if (s == "outer") return PackAxis::Outermost;
  throw Error(fmt::format("unknown axis '{}'", s));
}

void emit(const Globals& g, const json& j, const std::string& text) {
  if (g.format == "json") {
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << text;
  }
}

ExperimentConfig load_config(const Globals& g) {
  if (g.config.empty()) throw Error("--config is required");
  ExperimentConfig cfg = load_experiment_config(g.config);
  if (g.seed) cfg.seed = *g.seed;
  return cfg;
}

std::string summary_table(const ExperimentResult& r) {
  std::string out = fmt::format("{:<20} {:>4} {:<8} {:>3} {:>12} {:>9} {:>9} {:>9}\n", "layer", "p",
                                "mode", "k", "cycles", "speedup", "eff", "success");
  for (const PointResult& row : r.rows) {
    if (!row.ok) {
      out += fmt::format("{:<20} {:>4} {:<8} {:>3} error: {}\n", row.layer_name,
                         row.point.precision, to_string(row.point.mode), row.point.spec_k,
                         row.error);
      continue;
    }
    out += fmt::format("{:<20} {:>4} {:<8} {:>3} {:>12} {:>9} {:>9} {:>9}\n", row.layer_name,
                       row.point.precision, to_string(row.point.mode), row.point.spec_k,
                       row.report.total_cycles, format_ratio(row.speedup).substr(0, 8),
                       format_ratio(row.energy_efficiency).substr(0, 8),
                       row.speculative ? format_ratio(row.speculation.success_rate).substr(0, 8)
                                       : std::string("-"));
  }
  return out;
}

int cmd_gen(const Globals& g, const std::vector<std::size_t>& dims, int precision,
            const std::string& dist, const std::string& act, std::optional<double> zero_fraction,
            double spread, double bias, const std::string& out) {
  SyntheticSpec spec;
  spec.distribution = parse_distribution(dist);
  spec.activation = parse_activation(act);
  spec.target_zero_fraction = zero_fraction;
  spec.spread = spread;
  spec.bias = bias;
  SyntheticInfo info;
  const QuantTensor t = generate_synthetic_tensor(spec, dims, precision, g.seed.value_or(0), &info);
  save_tensor(out, t);
  emit(g,
       {{"file", out},
        {"elements", t.size()},
        {"scale", info.scale},
        {"zero_fraction", info.zero_fraction},
        {"saturated_fraction", info.saturated_fraction}},
       fmt::format("{}: {} elements, zero fraction {}, scale {}\n", out, t.size(),
                   format_ratio(info.zero_fraction), format_ratio(info.scale)));
  return 0;
}

int cmd_encode(const Globals& g, const std::string& input, std::optional<long long> value,
               int width, int precision, const std::string& encoding) {
  const Encoding enc = parse_encoding(encoding);
  if (value) {
    const SliceConfig cfg = SliceConfig::for_precision(width, precision);
    const QuantTensor t({1}, precision, {*value});
    const SliceTensor s = encode(t, cfg, enc);
    json digits = json::array();
    std::string text = fmt::format("{} ->", *value);
    for (int k = s.plane_count() - 1; k >= 0; --k) {
      digits.push_back(s.plane(k)[0]);
      text += fmt::format(" {}", s.plane(k)[0]);
    }
    emit(g, {{"value", *value}, {"digits_msb_first", digits}}, text + "\n");
    return 0;
  }
  if (input.empty()) throw Error("encode needs a tensor file or --value");
  const QuantTensor t = load_tensor(input);
  const SliceConfig cfg = SliceConfig::for_precision(width, t.precision());
  const SliceTensor s = encode(t, cfg, enc);
  fs::create_directories(g.out_dir);
  json files = json::array();
  std::string text;
  for (int k = 0; k < s.plane_count(); ++k) {
    const auto plane = s.plane(k);
    const QuantTensor digits(t.dims(), width + (enc == Encoding::Conventional ? 0 : 1),
                             std::vector<std::int64_t>(plane.begin(), plane.end()));
    const fs::path path = fs::path(g.out_dir) / fmt::format("plane{}.sbt", k);
    save_tensor(path, digits);
    files.push_back(path.generic_string());
    text += path.generic_string() + "\n";
  }
  emit(g, {{"planes", files}}, text);
  return 0;
}

int cmd_stats(const Globals& g, const std::string& input, int width, const std::string& axis) {
  const QuantTensor t = load_tensor(input);
  const SliceConfig cfg = SliceConfig::for_precision(width, t.precision());
  const PackAxis ax = parse_axis(axis);
  json j{{"elements", t.size()}, {"precision", t.precision()}, {"slice_width", width}};
  std::string text = fmt::format("{} elements at {} bits, w={}\n", t.size(), t.precision(), width);
  for (Encoding e : {Encoding::Sbr, Encoding::Conventional, Encoding::ConventionalAligned}) {
    const SparsityStats s = sparsity_stats(encode(t, cfg, e), ax);
    json planes = json::array();
    for (double f : s.per_plane_zero_fraction) planes.push_back(f);
    j[std::string(to_string(e))] = {{"zero_digit_fraction", s.total_zero_fraction},
                                    {"zero_subword_fraction", s.zero_subword_fraction},
                                    {"per_plane", planes}};
    j["element_zero_fraction"] = s.element_zero_fraction;
    text += fmt::format("{:<21} zero digits {}  zero sub-words {}\n", to_string(e),
                        format_ratio(s.total_zero_fraction), format_ratio(s.zero_subword_fraction));
  }
  emit(g, j, text);
  return 0;
}

int cmd_compress(const Globals& g, const std::string& input, int width, const std::string& axis) {
  const QuantTensor t = load_tensor(input);
  const SliceTensor s = encode_sbr(t, SliceConfig::for_precision(width, t.precision()));
  const TensorCompression tc = compress_tensor(s, parse_axis(axis));
  fs::create_directories(g.out_dir);
  json planes = json::array();
  std::string text;
  for (std::size_t k = 0; k < tc.planes.size(); ++k) {
    const fs::path path = fs::path(g.out_dir) / fmt::format("plane{}.sbc", k);
    std::ofstream f(path, std::ios::binary);
    write_sbc1(f, tc.planes[k]);
    const bool pays = tc.compressed_bits[k] < tc.raw_bits[k];
    planes.push_back({{"file", path.generic_string()},
                      {"subwords", tc.planes[k].total_subwords},
                      {"records", tc.planes[k].records()},
                      {"raw_bits", tc.raw_bits[k]},
                      {"compressed_bits", tc.compressed_bits[k]},
                      {"compress", pays}});
    text += fmt::format("{}: {} sub-words, {} records, {} -> {} bits{}\n", path.generic_string(),
                        tc.planes[k].total_subwords, tc.planes[k].records(), tc.raw_bits[k],
                        tc.compressed_bits[k], pays ? "" : " (kept raw)");
  }
  std::vector<bool> flags;
  for (std::size_t k = 0; k < tc.planes.size(); ++k) flags.push_back(tc.compressed_bits[k] < tc.raw_bits[k]);
  const double ratio = tc.ratio_vs_original(flags);
  emit(g, {{"planes", planes}, {"ratio_vs_original", format_ratio(ratio)}},
       text + fmt::format("ratio vs original {}\n", format_ratio(ratio)));
  return 0;
}

int run_and_report(const Globals& g, ExperimentConfig cfg) {
  const ExperimentResult r = run_experiment(cfg);
  write_reports(r, g.out_dir);
  emit(g, summary_json(r), summary_table(r));
  for (const PointResult& row : r.rows) {
    if (!row.ok) return 1;
  }
  return 0;
}

int cmd_simulate_program(const Globals& g, const std::string& program_path,
                         const std::vector<std::string>& tensors, int mpu_cores,
                         const std::string& trace_path) {
  std::ifstream pin(program_path, std::ios::binary);
  if (!pin) throw Error(fmt::format("cannot open '{}'", program_path));
  Program prog;
  if (fs::path(program_path).extension() == ".sba") {
    std::stringstream ss;
    ss << pin.rdbuf();
    prog = assemble(ss.str());
  } else {
    prog = read_sbp(pin);
  }
  TensorMemory memory;
  for (const std::string& spec : tensors) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) throw Error(fmt::format("--tensor expects ADDR=FILE, got '{}'", spec));
    const unsigned long addr = std::stoul(spec.substr(0, eq), nullptr, 0);
    if (addr > 0xFFFF) throw RangeError(fmt::format("address {} exceeds 16 bits", addr));
    memory.insert_or_assign(static_cast<std::uint16_t>(addr), load_tensor(spec.substr(eq + 1)));
  }
  const ExecutionTrace trace = execute_program(prog, mpu_cores, memory);
  if (!trace_path.empty()) {
    std::ofstream t(trace_path);
    for (const json& rec : trace.records) t << rec.dump() << '\n';
  }
  fs::create_directories(g.out_dir);
  for (const auto& [addr, tensor] : memory) {
    save_tensor(fs::path(g.out_dir) / fmt::format("mem_{:04x}.sbt", addr), tensor);
  }
  emit(g,
       {{"fetches", trace.fetches},
        {"total_cycles", trace.total_cycles},
        {"halted", trace.halted},
        {"runs", trace.outcomes.size()}},
       fmt::format("{} words fetched, {} runs, {} cycles{}\n", trace.fetches, trace.outcomes.size(),
                   trace.total_cycles, trace.halted ? ", halted" : ""));
  return 0;
}

int cmd_asm(const std::string& input, std::string output) {
  std::ifstream in(input);
  if (!in) throw Error(fmt::format("cannot open '{}'", input));
  std::stringstream ss;
  ss << in.rdbuf();
  const Program p = assemble(ss.str());
  if (output.empty()) output = fs::path(input).replace_extension(".sbp").string();
  std::ofstream out(output, std::ios::binary);
  write_sbp(out, p);
  std::cout << fmt::format("{}: {} words\n", output, p.words.size());
  return 0;
}

int cmd_disasm(const std::string& input, const std::string& output) {
  std::ifstream in(input, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open '{}'", input));
  const std::string text = disassemble(read_sbp(in));
  if (output.empty()) {
    std::cout << text;
  } else {
    std::ofstream(output) << text;
  }
  return 0;
}

int cmd_bench(const Globals& g, int repeats) {
  ExperimentConfig cfg = load_config(g);
  std::vector<double> wall;
  ExperimentResult last;
  for (int i = 0; i < repeats; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    last = run_experiment(cfg);
    wall.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  std::uint64_t cycles = 0;
  for (const PointResult& r : last.rows) cycles += r.report.total_cycles;
  const double best = *std::min_element(wall.begin(), wall.end());
  emit(g,
       {{"points", last.rows.size()},
        {"simulated_cycles", cycles},
        {"best_wall_seconds", best},
        {"repeats", repeats}},
       fmt::format("{} points, {} simulated cycles, best of {}: {:.3f} s\n", last.rows.size(),
                   cycles, repeats, best));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Signed bit-slice accelerator simulator"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "experiment config (JSON)");
  app.add_option("--seed", g.seed, "overrides the config seed");
  app.add_option("--out-dir", g.out_dir, "directory for written files")->capture_default_str();
  app.add_option("--format", g.format, "stdout format")
      ->check(CLI::IsMember({"text", "json"}))
      ->capture_default_str();

  std::vector<std::size_t> dims;
  int precision = 7, width = 4, mpu_cores = 4, repeats = 3;
  std::string dist = "laplace", act = "none", out, input, encoding = "sbr", axis = "inner", trace;
  std::optional<double> zero_fraction;
  std::optional<long long> value;
  double spread = 1.0, bias = 0.0;
  std::vector<std::string> tensors;

  auto* gen = app.add_subcommand("gen", "generate a synthetic SBT1 tensor");
  gen->add_option("--dims", dims, "dimensions")->delimiter(',')->required();
  gen->add_option("--precision", precision)->capture_default_str();
  gen->add_option("--distribution", dist)->capture_default_str();
  gen->add_option("--activation", act)->capture_default_str();
  gen->add_option("--zero-fraction", zero_fraction);
  gen->add_option("--spread", spread)->capture_default_str();
  gen->add_option("--bias", bias)->capture_default_str();
  gen->add_option("-o,--output", out)->required();

  auto* enc = app.add_subcommand("encode", "slice a tensor or a single value into digit planes");
  enc->add_option("input", input, "SBT1 tensor");
  enc->add_option("--value", value, "encode one integer and print its digits");
  enc->add_option("--width", width)->capture_default_str();
  enc->add_option("--precision", precision, "precision for --value")->capture_default_str();
  enc->add_option("--encoding", encoding)
      ->check(CLI::IsMember({"sbr", "conventional", "conventional_aligned"}))
      ->capture_default_str();

  auto* stats = app.add_subcommand("stats", "digit and sub-word sparsity of a tensor");
  stats->add_option("input", input)->required();
  stats->add_option("--width", width)->capture_default_str();
  stats->add_option("--axis", axis)->check(CLI::IsMember({"inner", "outer"}))->capture_default_str();

  auto* comp = app.add_subcommand("compress", "RLE-compress SBR planes to SBC1 files");
  comp->add_option("input", input)->required();
  comp->add_option("--width", width)->capture_default_str();
  comp->add_option("--axis", axis)->check(CLI::IsMember({"inner", "outer"}))->capture_default_str();

  auto* sim = app.add_subcommand("simulate", "run an experiment config or a program");
  sim->add_option("--program", input, "program to execute (.sbp or .sba)");
  sim->add_option("--tensor", tensors, "ADDR=FILE tensor preloaded at a base address");
  sim->add_option("--mpu-cores", mpu_cores)->capture_default_str();
  sim->add_option("--trace", trace, "JSON-lines trace output");

  auto* spec = app.add_subcommand("speculate", "run the config's pooled layers under output speculation");

  auto* as = app.add_subcommand("asm", "assemble .sba text into a .sbp binary");
  as->add_option("input", input)->required();
  as->add_option("-o,--output", out);

  auto* dis = app.add_subcommand("disasm", "disassemble a .sbp binary");
  dis->add_option("input", input)->required();
  dis->add_option("-o,--output", out);

  auto* bench = app.add_subcommand("bench", "time the config's sweep");
  bench->add_option("--repeats", repeats)->check(CLI::PositiveNumber)->capture_default_str();

  auto* rep = app.add_subcommand("report", "run the config and write CSV/JSON reports");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen(g, dims, precision, dist, act, zero_fraction, spread, bias, out);
    if (enc->parsed()) return cmd_encode(g, input, value, width, precision, encoding);
    if (stats->parsed()) return cmd_stats(g, input, width, axis);
    if (comp->parsed()) return cmd_compress(g, input, width, axis);
    if (sim->parsed()) {
      if (!input.empty()) return cmd_simulate_program(g, input, tensors, mpu_cores, trace);
      return run_and_report(g, load_config(g));
    }
    if (spec->parsed()) {
      ExperimentConfig cfg = load_config(g);
      cfg.skip_modes = {SkipMode::InOutSkip};
      std::erase_if(cfg.layers, [](const LayerConfig& l) { return !l.layer.pooled(); });
      if (cfg.layers.empty()) throw Error("config has no pooled layers");
      return run_and_report(g, cfg);
    }
    if (as->parsed()) return cmd_asm(input, out);
    if (dis->parsed()) return cmd_disasm(input, out);
    if (bench->parsed()) return cmd_bench(g, repeats);
    if (rep->parsed()) return run_and_report(g, load_config(g));
  } catch (const std::exception& e) {
    std::cerr << "sbrsim: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
