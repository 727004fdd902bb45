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

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sbrsim/layer.hpp"
#include "sbrsim/pe.hpp"

namespace sbrsim {

/// Bidirectional 2-D mesh. Router ids place the DMU cores first, then the
/// MPU cores; router r sits at (r % columns, r / columns).
struct MeshConfig {
  int mpu_cores = 4;
  int dmu_cores = 1;
  int pe_arrays_per_core = 3;
  int link_width_bits = 64;
  int columns = 0;  ///< 0 picks ceil(sqrt(routers))

  void validate() const;
  int routers() const { return mpu_cores + dmu_cores; }
  int grid_columns() const;
  int grid_rows() const;
  int total_pes() const { return mpu_cores * pe_arrays_per_core; }
  int mpu_router(int core) const { return dmu_cores + core; }
  std::pair<int, int> coords(int router) const;
};

/// Directed mesh edges of the XY (column-first) route between two routers.
std::vector<std::pair<int, int>> xy_route(const MeshConfig& mesh, int from, int to);
int hop_distance(const MeshConfig& mesh, int from, int to);

enum class DataClass { Input, Weight, Output, Partial };
inline constexpr std::array<DataClass, 4> kDataClasses{DataClass::Input, DataClass::Weight,
                                                       DataClass::Output, DataClass::Partial};
std::string_view to_string(DataClass c);

enum class AllocationPattern {
  InOutMulticast,               ///< 2-D PE grid: inputs along rows, weights along columns
  InputReuse,                   ///< one input object to every PE, output channels split
  WeightBroadcastAcrossOrders,  ///< PEs grouped per input slice order, weights broadcast
  InputShareSpatialWeights,     ///< kernel rows split across PEs sharing one input
};
std::string_view to_string(AllocationPattern p);
AllocationPattern parse_allocation_pattern(std::string_view text);

/// Work one PE array receives. Ranges are half-open; order -1 means all planes.
struct PeTask {
  int pe = 0;
  int oc_begin = 0, oc_end = 0;
  int oh_begin = 0, oh_end = 0;
  int kh_begin = 0, kh_end = 0;
  int input_order = -1;
};

struct DataObject {
  DataClass data_class = DataClass::Input;
  std::string label;
  std::uint64_t bytes = 0;
  std::vector<int> destinations;  ///< PE ids for inputs/weights, empty for DMU-bound data
  int source_pe = -1;             ///< producer PE for outputs/partials
};

/// Stored operand sizes, compression already applied.
struct OperandBytes {
  std::vector<std::uint64_t> input_planes;
  std::vector<std::uint64_t> weight_planes;
  std::uint64_t outputs = 0;
};

struct Assignment {
  AllocationPattern pattern = AllocationPattern::InputReuse;
  std::vector<PeTask> tasks;
  std::vector<DataObject> objects;
  bool padded = false;  ///< some split was uneven
};

int pe_core(const MeshConfig& mesh, int pe);

Assignment allocate_workload(const LayerDescriptor& layer, const MeshConfig& mesh,
                             AllocationPattern pattern, const OperandBytes& sizes);

/// True when every (output channel, output row, kernel row, input order)
/// combination of the layer is owned by exactly one task.
bool covers_exactly_once(const Assignment& a, const LayerDescriptor& layer);

struct TransferStats {
  std::uint64_t messages = 0;
  std::uint64_t bytes = 0;        ///< injected at the source, one copy per multicast
  std::uint64_t naive_bytes = 0;  ///< one copy per destination PE
  std::uint64_t link_traversals = 0;
  std::uint64_t naive_link_traversals = 0;
  std::uint64_t hop_bits = 0;

  double reuse_factor() const;
};

struct TransferLog {
  std::array<TransferStats, 4> classes{};
  std::uint64_t noc_cycles = 0;  ///< load/drain phase at one link beat per cycle

  const TransferStats& at(DataClass c) const { return classes[static_cast<std::size_t>(c)]; }
  TransferStats& at(DataClass c) { return classes[static_cast<std::size_t>(c)]; }
  std::uint64_t total_bytes() const;
  std::uint64_t total_hop_bits() const;
};

/// Multicast trees follow the union of XY routes from the DMU; PEs on one
/// core share the core's router.
TransferLog simulate_bi_noc_transfers(const Assignment& a, const MeshConfig& mesh);

struct UniNocWidth {
  int chained = 0;
  int naive = 0;
  double reduction = 0.0;
};

UniNocWidth uni_noc_link_width(const PEConfig& cfg, int n_orders, int shift);

}  // namespace sbrsim
