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

#include "sbrsim/noc.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "sbrsim/error.hpp"

namespace sbrsim {

void MeshConfig::validate() const {
  if (mpu_cores < 1 || dmu_cores < 1) throw GeometryError("mesh needs at least one MPU and DMU");
  if (routers() > 126) throw GeometryError("mesh exceeds the 7-bit target space");
  if (pe_arrays_per_core < 1 || link_width_bits < 1 || columns < 0) {
    throw GeometryError("bad mesh parameters");
  }
}

int MeshConfig::grid_columns() const {
  if (columns > 0) return columns;
  return static_cast<int>(std::ceil(std::sqrt(static_cast<double>(routers()))));
}

int MeshConfig::grid_rows() const {
  const int c = grid_columns();
  return (routers() + c - 1) / c;
}

std::pair<int, int> MeshConfig::coords(int router) const {
  const int c = grid_columns();
  return {router % c, router / c};
}

std::vector<std::pair<int, int>> xy_route(const MeshConfig& mesh, int from, int to) {
  const int cols = mesh.grid_columns();
  auto [x, y] = mesh.coords(from);
  const auto [tx, ty] = mesh.coords(to);
  std::vector<std::pair<int, int>> edges;
  while (x != tx) {
    const int nx = x + (tx > x ? 1 : -1);
    edges.emplace_back(y * cols + x, y * cols + nx);
    x = nx;
  }
  while (y != ty) {
    const int ny = y + (ty > y ? 1 : -1);
    edges.emplace_back(y * cols + x, ny * cols + x);
    y = ny;
  }
  return edges;
}

int hop_distance(const MeshConfig& mesh, int from, int to) {
  const auto [x0, y0] = mesh.coords(from);
  const auto [x1, y1] = mesh.coords(to);
  return std::abs(x0 - x1) + std::abs(y0 - y1);
}

std::string_view to_string(DataClass c) {
  switch (c) {
    case DataClass::Input: return "input";
    case DataClass::Weight: return "weight";
    case DataClass::Output: return "output";
    case DataClass::Partial: return "partial";
  }
  return "?";
}

std::string_view to_string(AllocationPattern p) {
  switch (p) {
    case AllocationPattern::InOutMulticast: return "inout_multicast";
    case AllocationPattern::InputReuse: return "input_reuse";
    case AllocationPattern::WeightBroadcastAcrossOrders: return "weight_broadcast";
    case AllocationPattern::InputShareSpatialWeights: return "input_share";
  }
  return "?";
}

AllocationPattern parse_allocation_pattern(std::string_view text) {
  for (auto p : {AllocationPattern::InOutMulticast, AllocationPattern::InputReuse,
                 AllocationPattern::WeightBroadcastAcrossOrders,
                 AllocationPattern::InputShareSpatialWeights}) {
    if (to_string(p) == text) return p;
  }
  throw FormatError(fmt::format("unknown allocation pattern '{}'", text));
}

int pe_core(const MeshConfig& mesh, int pe) { return pe / mesh.pe_arrays_per_core; }

namespace {

struct Range {
  int begin = 0, end = 0;
};

std::vector<Range> split(int n, int parts, bool& padded) {
  const int used = std::max(1, std::min(parts, n));
  const int chunk = (n + used - 1) / used;
  if (n % used != 0) padded = true;
  std::vector<Range> out;
  for (int b = 0; b < n; b += chunk) out.push_back({b, std::min(n, b + chunk)});
  return out;
}

std::uint64_t share(std::uint64_t total, std::uint64_t part, std::uint64_t whole) {
  return whole == 0 ? 0 : (total * part + whole - 1) / whole;
}

std::uint64_t sum(const std::vector<std::uint64_t>& v) {
  std::uint64_t s = 0;
  for (auto x : v) s += x;
  return s;
}

}  // namespace

Assignment allocate_workload(const LayerDescriptor& layer, const MeshConfig& mesh,
                             AllocationPattern pattern, const OperandBytes& sizes) {
  layer.validate();
  mesh.validate();
  const ConvGeometry g = layer.geometry();
  const int OC = g.out_channels, OH = g.out_height(), KH = g.kernel_h;
  const int n_in = layer.input_slices.slices();
  const int P = mesh.total_pes();
  const std::uint64_t in_total = sum(sizes.input_planes);
  const std::uint64_t w_total = sum(sizes.weight_planes);
  const std::uint64_t out_total = sizes.outputs;
  const std::uint64_t cells = static_cast<std::uint64_t>(OC) * OH;

  Assignment a;
  a.pattern = pattern;
  auto add = [&](DataClass cls, std::string label, std::uint64_t bytes, std::vector<int> dests,
                 int source = -1) {
    if (bytes == 0) return;
    a.objects.push_back({cls, std::move(label), bytes, std::move(dests), source});
  };
  auto output_of = [&](const PeTask& t) {
    const std::uint64_t part =
        static_cast<std::uint64_t>(t.oc_end - t.oc_begin) * (t.oh_end - t.oh_begin);
    add(DataClass::Output, fmt::format("out.pe{}", t.pe), share(out_total, part, cells), {}, t.pe);
  };

  if (P == 1) {
    a.tasks.push_back({0, 0, OC, 0, OH, 0, KH, -1});
    add(DataClass::Input, "in", in_total, {0});
    add(DataClass::Weight, "w", w_total, {0});
    output_of(a.tasks.back());
    return a;
  }

  switch (pattern) {
    case AllocationPattern::InOutMulticast: {
      int rows = static_cast<int>(std::sqrt(static_cast<double>(P)));
      while (P % rows != 0) --rows;
      const int cols = P / rows;
      const auto row_parts = split(OH, rows, a.padded);
      const auto col_parts = split(OC, cols, a.padded);
      const int used_cols = static_cast<int>(col_parts.size());
      for (std::size_t r = 0; r < row_parts.size(); ++r) {
        std::vector<int> dests;
        for (int c = 0; c < used_cols; ++c) dests.push_back(static_cast<int>(r) * cols + c);
        add(DataClass::Input, fmt::format("in.rows{}", r),
            share(in_total, row_parts[r].end - row_parts[r].begin, OH), dests);
      }
      for (int c = 0; c < used_cols; ++c) {
        std::vector<int> dests;
        for (std::size_t r = 0; r < row_parts.size(); ++r) dests.push_back(static_cast<int>(r) * cols + c);
        add(DataClass::Weight, fmt::format("w.oc{}", c),
            share(w_total, col_parts[c].end - col_parts[c].begin, OC), dests);
      }
      for (std::size_t r = 0; r < row_parts.size(); ++r) {
        for (int c = 0; c < used_cols; ++c) {
          a.tasks.push_back({static_cast<int>(r) * cols + c, col_parts[c].begin, col_parts[c].end,
                             row_parts[r].begin, row_parts[r].end, 0, KH, -1});
          output_of(a.tasks.back());
        }
      }
      break;
    }
    case AllocationPattern::InputReuse: {
      const auto parts = split(OC, P, a.padded);
      std::vector<int> dests;
      for (std::size_t k = 0; k < parts.size(); ++k) {
        const int pe = static_cast<int>(k);
        dests.push_back(pe);
        a.tasks.push_back({pe, parts[k].begin, parts[k].end, 0, OH, 0, KH, -1});
        add(DataClass::Weight, fmt::format("w.pe{}", pe),
            share(w_total, parts[k].end - parts[k].begin, OC), {pe});
        output_of(a.tasks.back());
      }
      add(DataClass::Input, "in", in_total, dests);
      break;
    }
    case AllocationPattern::WeightBroadcastAcrossOrders: {
      if (P < n_in) {
        throw GeometryError(fmt::format("{} PEs cannot hold {} input orders", P, n_in));
      }
      const auto parts = split(OC, P / n_in, a.padded);
      std::vector<std::vector<int>> order_dests(static_cast<std::size_t>(n_in));
      for (std::size_t grp = 0; grp < parts.size(); ++grp) {
        std::vector<int> members;
        for (int m = 0; m < n_in; ++m) {
          const int pe = static_cast<int>(grp) * n_in + m;
          members.push_back(pe);
          order_dests[m].push_back(pe);
          a.tasks.push_back({pe, parts[grp].begin, parts[grp].end, 0, OH, 0, KH, m});
        }
        add(DataClass::Weight, fmt::format("w.group{}", grp),
            share(w_total, parts[grp].end - parts[grp].begin, OC), members);
        // The chain end holds the fully accumulated outputs of the group.
        output_of(a.tasks.back());
      }
      for (int m = 0; m < n_in; ++m) {
        const std::uint64_t bytes =
            static_cast<std::size_t>(m) < sizes.input_planes.size() ? sizes.input_planes[m] : 0;
        add(DataClass::Input, fmt::format("in.order{}", m), bytes, order_dests[m]);
      }
      break;
    }
    case AllocationPattern::InputShareSpatialWeights: {
      const auto parts = split(KH, P, a.padded);
      std::vector<int> dests;
      for (std::size_t k = 0; k < parts.size(); ++k) {
        const int pe = static_cast<int>(k);
        dests.push_back(pe);
        a.tasks.push_back({pe, 0, OC, 0, OH, parts[k].begin, parts[k].end, -1});
        add(DataClass::Weight, fmt::format("w.kh{}", k),
            share(w_total, parts[k].end - parts[k].begin, KH), {pe});
        if (parts.size() == 1) {
          output_of(a.tasks.back());
        } else {
          add(DataClass::Partial, fmt::format("partial.pe{}", pe), out_total, {}, pe);
        }
      }
      add(DataClass::Input, "in", in_total, dests);
      break;
    }
  }
  return a;
}

bool covers_exactly_once(const Assignment& a, const LayerDescriptor& layer) {
  const ConvGeometry g = layer.geometry();
  const int OC = g.out_channels, OH = g.out_height(), KH = g.kernel_h;
  const int n_in = layer.input_slices.slices();
  std::vector<int> hits(static_cast<std::size_t>(OC) * OH * KH * n_in, 0);
  for (const auto& t : a.tasks) {
    if (t.oc_begin < 0 || t.oc_end > OC || t.oh_begin < 0 || t.oh_end > OH || t.kh_begin < 0 ||
        t.kh_end > KH || t.input_order >= n_in) {
      return false;
    }
    const int o0 = t.input_order < 0 ? 0 : t.input_order;
    const int o1 = t.input_order < 0 ? n_in : t.input_order + 1;
    for (int oc = t.oc_begin; oc < t.oc_end; ++oc) {
      for (int oh = t.oh_begin; oh < t.oh_end; ++oh) {
        for (int kh = t.kh_begin; kh < t.kh_end; ++kh) {
          for (int o = o0; o < o1; ++o) {
            ++hits[((static_cast<std::size_t>(oc) * OH + oh) * KH + kh) * n_in + o];
          }
        }
      }
    }
  }
  return std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; });
}

double TransferStats::reuse_factor() const {
  return bytes == 0 ? 1.0 : static_cast<double>(naive_bytes) / static_cast<double>(bytes);
}

std::uint64_t TransferLog::total_bytes() const {
  std::uint64_t s = 0;
  for (const auto& c : classes) s += c.bytes;
  return s;
}

std::uint64_t TransferLog::total_hop_bits() const {
  std::uint64_t s = 0;
  for (const auto& c : classes) s += c.hop_bits;
  return s;
}

TransferLog simulate_bi_noc_transfers(const Assignment& a, const MeshConfig& mesh) {
  mesh.validate();
  TransferLog log;
  const int dmu = 0;
  const std::uint64_t width = static_cast<std::uint64_t>(mesh.link_width_bits);
  std::uint64_t beats_total = 0;
  for (const auto& obj : a.objects) {
    TransferStats& s = log.at(obj.data_class);
    const std::uint64_t beats = (obj.bytes * 8 + width - 1) / width;
    std::set<std::pair<int, int>> tree;
    std::uint64_t naive_hops = 0;
    std::uint64_t copies = 0;
    if (obj.destinations.empty()) {
      const int src = mesh.mpu_router(pe_core(mesh, obj.source_pe));
      for (const auto& e : xy_route(mesh, src, dmu)) tree.insert(e);
      naive_hops = tree.size();
      copies = 1;
    } else {
      for (int pe : obj.destinations) {
        const int router = mesh.mpu_router(pe_core(mesh, pe));
        if (pe_core(mesh, pe) >= mesh.mpu_cores) {
          throw GeometryError(fmt::format("PE {} lies outside the mesh", pe));
        }
        const auto route = xy_route(mesh, dmu, router);
        tree.insert(route.begin(), route.end());
        naive_hops += route.size();
        ++copies;
      }
    }
    ++s.messages;
    s.bytes += obj.bytes;
    s.naive_bytes += obj.bytes * copies;
    s.link_traversals += tree.size() * beats;
    s.naive_link_traversals += naive_hops * beats;
    s.hop_bits += tree.size() * obj.bytes * 8;
    beats_total += beats;
  }
  log.noc_cycles = beats_total;
  return log;
}

UniNocWidth uni_noc_link_width(const PEConfig& cfg, int n_orders, int shift) {
  if (n_orders < 1 || shift < 0) throw RangeError("bad accumulation chain parameters");
  UniNocWidth w;
  w.chained = cfg.acc_width;
  w.naive = cfg.acc_width + shift * (n_orders - 1);
  w.reduction = static_cast<double>(w.naive - w.chained) / static_cast<double>(w.naive);
  return w;
}

}  // namespace sbrsim
