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

#include "sbrsim/report.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <ostream>

#include "sbrsim/error.hpp"

namespace sbrsim {

using nlohmann::json;

std::string format_ratio(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (std::isnan(value)) return "nan";
  std::string s = fmt::format("{:.6f}", value);
  if (s == "-0.000000") s = "0.000000";
  return s;
}

namespace {

json ratio_json(double value) {
  if (!std::isfinite(value)) return format_ratio(value);
  return std::round(value * 1e6) / 1e6;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string row_key(const PointResult& r) {
  return fmt::format("{},{},{},{},{}", r.layer_index, csv_field(r.layer_name), r.point.precision,
                     to_string(r.point.mode), r.point.spec_k);
}

std::string operand_fields(const OperandStats& s) {
  return fmt::format("{},{},{},{},{}", format_ratio(s.element_zero_fraction),
                     format_ratio(s.sbr_zero_digit_fraction),
                     format_ratio(s.conventional_zero_digit_fraction),
                     format_ratio(s.zero_subword_fraction), format_ratio(s.compression_ratio));
}

}  // namespace

void write_results_csv(std::ostream& out, const ExperimentResult& result) {
  out << "layer,layer_name,precision,skip_mode,spec_k,kind,status,error,"
         "total_cycles,mac_work_cycles,nominal_macs,mac_executed,mac_skipped,"
         "ibuf_reads,ibuf_writes,wbuf_reads,wbuf_writes,idxbuf_reads,idxbuf_writes,"
         "obuf_reads,obuf_writes,rf_accesses,wrap_events,dram_bytes,noc_bytes,noc_hop_bits,"
         "noc_cycles,fetches,energy_proxy,speedup,energy_efficiency,mac_scaling,"
         "input_zero_fraction,input_sbr_zero_digits,input_conventional_zero_digits,"
         "input_zero_subwords,input_compression_ratio,"
         "weight_zero_fraction,weight_sbr_zero_digits,weight_conventional_zero_digits,"
         "weight_zero_subwords,weight_compression_ratio,"
         "spec_windows,spec_windows_success,success_rate,spec_channel_windows,"
         "spec_channel_windows_success,channel_success_rate,spec_skipped_pass_macs,spec_output_mse,"
         "output_hash,spec_output_hash\n";
  for (const PointResult& r : result.rows) {
    const CycleEnergyReport& c = r.report;
    out << row_key(r) << ',' << to_string(r.kind) << ',' << (r.ok ? "ok" : "error") << ','
        << csv_field(r.error) << ',';
    out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},", c.total_cycles,
                       c.mac_work_cycles, c.nominal_macs, c.mac_executed, c.mac_skipped,
                       c.ibuf_reads, c.ibuf_writes, c.wbuf_reads, c.wbuf_writes, c.idxbuf_reads,
                       c.idxbuf_writes, c.obuf_reads, c.obuf_writes, c.rf_accesses, c.wrap_events,
                       c.dram_bytes, c.noc_bytes, c.noc_hop_bits, r.transfers.noc_cycles,
                       r.fetches);
    out << format_ratio(r.energy) << ',' << format_ratio(r.speedup) << ','
        << format_ratio(r.energy_efficiency) << ',' << format_ratio(r.mac_scaling) << ','
        << operand_fields(r.input) << ',' << operand_fields(r.weight) << ',';
    const SpeculationStats& s = r.speculation;
    out << fmt::format("{},{},{},{},{},{},{},{},", s.windows_total, s.windows_success,
                       format_ratio(s.success_rate), s.channel_windows_total,
                       s.channel_windows_success, format_ratio(s.channel_success_rate),
                       s.skipped_pass_macs, format_ratio(s.output_mse));
    out << r.output_hash << ',' << r.spec_output_hash << '\n';
  }
}

void write_passes_csv(std::ostream& out, const ExperimentResult& result) {
  out << "layer,layer_name,precision,skip_mode,spec_k,input_order,weight_order,orientation,skip,"
         "masked,cycles,mac_work_cycles,nominal_macs,mac_executed,mac_skipped,"
         "mac_executed_unmasked,ibuf_reads,wbuf_reads,idxbuf_reads,obuf_reads,obuf_writes,"
         "rf_accesses,wrap_events\n";
  for (const PointResult& r : result.rows) {
    for (const PassReport& p : r.report.passes) {
      out << row_key(r) << ','
          << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", p.input_order,
                         p.weight_order, to_string(p.orientation), p.skip ? 1 : 0,
                         p.masked ? 1 : 0, p.cycles, p.mac_work_cycles, p.nominal_macs,
                         p.mac_executed, p.mac_skipped, p.mac_executed_unmasked, p.ibuf_reads,
                         p.wbuf_reads, p.idxbuf_reads, p.obuf_reads, p.obuf_writes,
                         p.rf_accesses, p.wrap_events);
    }
  }
}

void write_transfers_csv(std::ostream& out, const ExperimentResult& result) {
  out << "layer,layer_name,precision,skip_mode,spec_k,data_class,messages,bytes,link_traversals,"
         "reuse_factor,naive_bytes,naive_link_traversals,hop_bits\n";
  for (const PointResult& r : result.rows) {
    if (!r.ok || r.kind == LayerKind::MaxPool) continue;
    for (DataClass dc : kDataClasses) {
      const TransferStats& t = r.transfers.at(dc);
      out << row_key(r) << ','
          << fmt::format("{},{},{},{},{},{},{},{}\n", to_string(dc), t.messages, t.bytes,
                         t.link_traversals, format_ratio(t.reuse_factor()), t.naive_bytes,
                         t.naive_link_traversals, t.hop_bits);
    }
  }
}

json summary_json(const ExperimentResult& result) {
  const ExperimentConfig& cfg = result.config;
  json points = json::array();
  std::size_t failed = 0;
  for (const PointResult& r : result.rows) {
    if (!r.ok) ++failed;
    json p{{"layer", r.layer_name},
           {"precision", r.point.precision},
           {"skip_mode", to_string(r.point.mode)},
           {"spec_k", r.point.spec_k},
           {"status", r.ok ? "ok" : "error"}};
    if (!r.ok) {
      p["error"] = r.error;
    } else {
      p["total_cycles"] = r.report.total_cycles;
      p["nominal_macs"] = r.report.nominal_macs;
      p["mac_executed"] = r.report.mac_executed;
      p["energy_proxy"] = ratio_json(r.energy);
      p["speedup"] = ratio_json(r.speedup);
      p["energy_efficiency"] = ratio_json(r.energy_efficiency);
      p["mac_scaling"] = ratio_json(r.mac_scaling);
      p["output_hash"] = r.output_hash;
      if (r.speculative) {
        p["speculation"] = {{"windows", r.speculation.windows_total},
                            {"success", r.speculation.windows_success},
                            {"success_rate", ratio_json(r.speculation.success_rate)},
                            {"channel_windows", r.speculation.channel_windows_total},
                            {"channel_success", r.speculation.channel_windows_success},
                            {"channel_success_rate", ratio_json(r.speculation.channel_success_rate)},
                            {"skipped_pass_macs", r.speculation.skipped_pass_macs},
                            {"output_mse", ratio_json(r.speculation.output_mse)},
                            {"output_hash", r.spec_output_hash}};
      }
    }
    points.push_back(std::move(p));
  }

  // Network totals per sweep point, over layers that succeeded at both the
  // point and the baseline.
  json totals = json::array();
  const std::size_t per_layer = result.points.size();
  for (std::size_t k = 0; k < per_layer; ++k) {
    std::uint64_t cycles = 0, base_cycles = 0;
    double energy = 0, base_energy = 0;
    std::size_t layers = 0;
    for (std::size_t l = 0; l * per_layer + k < result.rows.size(); ++l) {
      const PointResult& r = result.rows[l * per_layer + k];
      if (!r.ok || r.speedup <= 0) continue;
      ++layers;
      cycles += r.report.total_cycles;
      energy += r.energy;
      base_cycles += static_cast<std::uint64_t>(std::llround(r.speedup * r.report.total_cycles));
      base_energy += r.energy_efficiency * r.energy;
    }
    const SweepPoint& pt = result.points[k];
    totals.push_back({{"precision", pt.precision},
                      {"skip_mode", to_string(pt.mode)},
                      {"spec_k", pt.spec_k},
                      {"layers", layers},
                      {"total_cycles", cycles},
                      {"energy_proxy", ratio_json(energy)},
                      {"speedup", ratio_json(cycles ? static_cast<double>(base_cycles) / cycles : 0.0)},
                      {"energy_efficiency", ratio_json(energy > 0 ? base_energy / energy : 0.0)}});
  }

  return {{"name", cfg.name},
          {"seed", cfg.seed},
          {"energy_units", "proxy"},
          {"energy_note", "relative cost-table units, not silicon measurements"},
          {"baseline", {{"skip_mode", "noskip"}, {"precision", baseline_precision(cfg)}}},
          {"rows", result.rows.size()},
          {"failed_rows", failed},
          {"config", to_json(cfg)},
          {"points", points},
          {"totals", totals}};
}

void write_reports(const ExperimentResult& result, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(fmt::format("cannot create '{}': {}", dir.string(), ec.message()));
  auto open = [&](const char* name) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw Error(fmt::format("cannot write '{}'", (dir / name).string()));
    return f;
  };
  {
    auto f = open("results.csv");
    write_results_csv(f, result);
  }
  {
    auto f = open("passes.csv");
    write_passes_csv(f, result);
  }
  {
    auto f = open("transfers.csv");
    write_transfers_csv(f, result);
  }
  {
    auto f = open("summary.json");
    f << summary_json(result).dump(2) << '\n';
  }
}

}  // namespace sbrsim
