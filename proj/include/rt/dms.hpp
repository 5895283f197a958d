// Copyright 2026 The Region Runtime Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RT_DMS_HPP
#define RT_DMS_HPP

#include <map>
#include <memory>
#include <set>
#include <vector>

#include "rt/sfc.hpp"
#include "rt/storage.hpp"
#include "rt/trace.hpp"

namespace rt {

/// Distributed memory store: payloads live on the shard that staged them;
/// metadata is propagated to every shard owning part of the chunk's curve
/// interval image, so any routing shard can answer "who has data for this
/// box".
struct DmsConfig {
  sfc::HilbertParams hilbert;
  /// Element coordinate of grid cell (0, ..., 0).
  std::vector<std::int64_t> grid_origin;
  /// Element extent of one grid cell per axis; chunks need not align to it.
  std::vector<std::int64_t> cell_extent;
  /// Occupied sub-boxes of the cell grid (cell coordinates). The virtual
  /// domain renumbers exactly these cells.
  std::vector<BoundingBox> occupied;
  int shard_count = 1;
  /// Simulated staging/read bandwidth in bytes per time unit; 0 = instant.
  double stage_bandwidth = 0.0;
  double read_bandwidth = 0.0;

  void validate() const;
};

/// Routing math shared by the in-process store and the socket client: cell
/// mapping, occupancy checks, and interval ownership.
class DmsRouting {
 public:
  DmsRouting() = default;
  explicit DmsRouting(DmsConfig config);

  const DmsConfig& config() const { return config_; }
  const sfc::VirtualDomainMap& virtual_map() const { return vmap_; }
  const sfc::ShardTable& shard_table() const { return table_; }

  /// Element-space box -> cell-grid box. Throws RangeError off the grid.
  BoundingBox element_box_to_cells(const BoundingBox& box) const;

  /// Curve intervals of an element box; throws NotOccupiedError when any
  /// covered cell is outside the occupied domain.
  std::vector<sfc::SfcInterval> occupied_intervals(
      const BoundingBox& element_box) const;

  std::set<int> owners_of_intervals(
      const std::vector<sfc::SfcInterval>& intervals) const;

  /// Validates that `entry_boxes` jointly cover every cell under
  /// `query`; throws NotFoundError otherwise.
  void check_cell_coverage(const BoundingBox& query,
                           const std::vector<BoundingBox>& entry_boxes) const;

 private:
  DmsConfig config_;
  sfc::VirtualDomainMap vmap_;
  sfc::ShardTable table_;
};

struct DmsMetaValue {
  RegionKind kind = RegionKind::kDense2D;
  ElementKind element_kind = ElementKind::kU8;
  int home_shard = 0;
  std::uint64_t seq = 0;
};

struct DmsStoredChunk {
  std::vector<std::uint8_t> payload;
  RegionKind kind = RegionKind::kDense2D;
  ElementKind element_kind = ElementKind::kU8;
  std::uint64_t seq = 0;
};

struct DmsShard {
  int shard_id = 0;
  /// Payloads staged with this shard as home.
  std::map<std::pair<DataRegionId, BoundingBox>, DmsStoredChunk> data_store;
  /// Chunk descriptors owned here because their curve intervals intersect
  /// this shard's virtual slice: interval -> (id, chunk box) -> descriptor.
  std::map<sfc::SfcInterval,
           std::map<std::pair<DataRegionId, BoundingBox>, DmsMetaValue>>
      metadata_index;
};

struct ReadResult {
  DataRegion region;
  /// Simulated instant the read data is available locally.
  double ready_time = 0.0;
};

class DmsStore : public StorageBackend {
 public:
  DmsStore(std::string name, DmsConfig config,
           std::shared_ptr<SequenceCounter> sequence,
           const Clock* clock = nullptr, TraceLog* trace = nullptr);

  const std::string& name() const override { return name_; }
  Completion stage_region(const DataRegion& region, int origin_node) override;
  DataRegion read_region(const DataRegionId& id,
                         const BoundingBox& query) override;
  Completion delete_region(const DataRegionId& id) override;

  /// Read with the simulated availability instant (what the event loop uses).
  ReadResult read_region_at(const DataRegionId& id, const BoundingBox& query);

  /// Stage with an explicit home shard (stage_region maps origin_node to a
  /// shard by modulo).
  Completion stage_on_shard(const DataRegion& region, int home_shard);

  int shard_count() const { return int(shards_.size()); }
  const DmsShard& shard(int s) const { return shards_.at(std::size_t(s)); }
  const DmsRouting& routing() const { return routing_; }
  const sfc::VirtualDomainMap& virtual_map() const {
    return routing_.virtual_map();
  }
  const sfc::ShardTable& shard_table() const { return routing_.shard_table(); }

  /// Shards holding payload bytes / metadata for the id (test observability).
  std::set<int> payload_shards(const DataRegionId& id) const;
  std::set<int> metadata_shards(const DataRegionId& id) const;

  /// Element-space box -> cell-grid box. Throws RangeError off the grid.
  BoundingBox element_box_to_cells(const BoundingBox& box) const {
    return routing_.element_box_to_cells(box);
  }

 private:
  double now() const { return clock_ ? clock_->now() : 0.0; }
  void emit(const std::string& kind, const std::string& id,
            const std::string& device, std::uint64_t bytes);

  std::string name_;
  DmsRouting routing_;
  std::shared_ptr<SequenceCounter> sequence_;
  const Clock* clock_;
  TraceLog* trace_;
  std::vector<DmsShard> shards_;
};

}  // namespace rt

#endif  // RT_DMS_HPP
