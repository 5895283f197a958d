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

#ifndef RT_SFC_HPP
#define RT_SFC_HPP

#include <cstdint>
#include <set>
#include <span>
#include <vector>

#include "rt/bounding_box.hpp"
#include "rt/error.hpp"

namespace rt::sfc {

/// Hilbert curve geometry: a dims-dimensional grid of 2^order cells per axis.
/// Total index bits dims * order must fit a signed 64-bit value.
struct HilbertParams {
  int dims = 2;
  int order = 1;

  void validate() const;
  std::uint64_t grid_side() const { return std::uint64_t(1) << order; }
  std::uint64_t cell_count() const {
    return std::uint64_t(1) << (dims * order);
  }
};

/// Maps a grid point to its position along the Hilbert curve. The curve
/// starts at the origin corner; at dims=2 order=1 the visiting sequence is
/// (0,0), (0,1), (1,1), (1,0). Throws RangeError when a coordinate falls
/// outside [0, 2^order).
std::uint64_t sfc_encode(std::span<const std::uint64_t> point,
                         const HilbertParams& params);

/// Exact inverse of sfc_encode. Throws RangeError when h >= 2^(dims*order).
std::vector<std::uint64_t> sfc_decode(std::uint64_t h,
                                      const HilbertParams& params);

/// Inclusive run of consecutive curve indices.
struct SfcInterval {
  std::uint64_t start = 0;
  std::uint64_t end = 0;

  std::uint64_t length() const { return end - start + 1; }
  bool operator==(const SfcInterval&) const = default;
  auto operator<=>(const SfcInterval&) const = default;
};

/// Decomposes a grid-aligned bounding box into the sorted, disjoint set of
/// curve intervals covering exactly its cells. Throws RangeError when the box
/// escapes the grid.
std::vector<SfcInterval> bbox_to_intervals(const BoundingBox& box,
                                           const HilbertParams& params);

/// Renumbers the occupied (possibly gapped) part of the curve into one
/// contiguous virtual domain [0, total).
class VirtualDomainMap {
 public:
  VirtualDomainMap() = default;
  VirtualDomainMap(std::vector<SfcInterval> occupied_sorted_disjoint);

  const std::vector<SfcInterval>& occupied() const { return occupied_; }
  const std::vector<std::uint64_t>& offsets() const { return offsets_; }
  std::uint64_t total() const { return total_; }

  /// Raw curve index to virtual index. Throws NotOccupiedError on gaps.
  std::uint64_t to_virtual(std::uint64_t raw) const;

  bool is_occupied(std::uint64_t raw) const;

 private:
  std::vector<SfcInterval> occupied_;
  std::vector<std::uint64_t> offsets_;
  std::uint64_t total_ = 0;
};

/// Merges the interval decompositions of all boxes into one virtual map.
VirtualDomainMap build_virtual_map(std::span<const BoundingBox> boxes,
                                   const HilbertParams& params);

/// Splits the virtual domain [0, total) into shard_count contiguous slices of
/// near-equal length (first total % shard_count slices are one longer).
class ShardTable {
 public:
  ShardTable() = default;
  ShardTable(std::uint64_t total, int shard_count);

  int shard_count() const { return shard_count_; }
  /// Half-open [start, end) virtual range of one shard.
  std::pair<std::uint64_t, std::uint64_t> slice(int shard) const;
  int owner_of_virtual(std::uint64_t v) const;

 private:
  std::uint64_t total_ = 0;
  int shard_count_ = 1;
  std::vector<std::uint64_t> boundaries_;  // size shard_count + 1
};

/// Exactly the shards whose virtual slice holds at least one cell of `box`.
/// Throws NotOccupiedError when the box touches an unoccupied cell.
std::set<int> owner_shards(const BoundingBox& box,
                           const VirtualDomainMap& vmap,
                           const ShardTable& shards,
                           const HilbertParams& params);

}  // namespace rt::sfc

#endif  // RT_SFC_HPP
