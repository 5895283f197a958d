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

#ifndef RT_DATA_REGION_HPP
#define RT_DATA_REGION_HPP

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "rt/bounding_box.hpp"
#include "rt/error.hpp"

namespace rt {

/// Tuple identifier of a data region: (namespace::key, type, timestamp,
/// version). Two regions stored under the same name in one template must
/// differ in at least one of type_tag / timestamp / version.
struct DataRegionId {
  std::string ns;
  std::string key;
  std::string type_tag;
  std::int64_t timestamp = 0;
  std::int64_t version = 0;

  std::string name() const { return ns + "::" + key; }

  bool operator==(const DataRegionId&) const = default;
  bool operator<(const DataRegionId& o) const {
    return std::tie(ns, key, type_tag, timestamp, version) <
           std::tie(o.ns, o.key, o.type_tag, o.timestamp, o.version);
  }

  std::string to_string() const;
};

enum class RegionKind : std::uint8_t {
  kDense1D = 0,
  kDense2D = 1,
  kDense3D = 2,
  kSparse = 3,
  kPolygon = 4,
};

enum class ElementKind : std::uint8_t {
  kU8 = 0,
  kU16 = 1,
  kI32 = 2,
  kF32 = 3,
  kF64 = 4,
};

std::size_t element_size(ElementKind kind);
bool is_dense(RegionKind kind);
/// Spatial rank of a dense kind (1, 2 or 3).
int dense_rank(RegionKind kind);

const char* to_string(RegionKind kind);
const char* to_string(ElementKind kind);

enum class IoMode : std::uint8_t {
  kInput = 0,
  kOutput = 1,
  kInputOutput = 2,
};

const char* to_string(IoMode mode);

/// One stored piece of a data region: a bounding box plus its payload bytes.
/// For dense kinds the payload is row-major with the last axis contiguous and
/// its length equals volume(bbox) * element size.
struct Chunk {
  std::uint64_t chunk_id = 0;
  BoundingBox bbox;
  ElementKind element_kind = ElementKind::kU8;
  std::vector<std::uint8_t> payload;
};

/// Polygon payloads are a u32 vertex count followed by interleaved i64
/// coordinates (little-endian).
std::vector<std::uint8_t> encode_polygon(
    std::span<const std::array<std::int64_t, 2>> vertices);
std::vector<std::array<std::int64_t, 2>> decode_polygon(
    std::span<const std::uint8_t> payload);

/// Storage materialization of one data product, chunked over its bounding
/// box. Starts metadata-only (materialized() == false, no chunks); adding the
/// first chunk materializes it. The bounding box is fixed at construction:
/// chunks may not escape it.
class DataRegion {
 public:
  DataRegion() = default;
  DataRegion(DataRegionId id, RegionKind kind, ElementKind element_kind,
             BoundingBox bbox);

  const DataRegionId& id() const { return id_; }
  RegionKind kind() const { return kind_; }
  ElementKind element_kind() const { return element_kind_; }
  const BoundingBox& bbox() const { return bbox_; }
  const BoundingBox& roi() const { return roi_; }
  IoMode io_mode() const { return io_mode_; }
  const std::string& storage_binding() const { return storage_binding_; }
  bool lazy() const { return lazy_; }
  bool materialized() const { return materialized_; }

  void set_io_mode(IoMode mode) { io_mode_ = mode; }
  void set_storage_binding(std::string name) {
    storage_binding_ = std::move(name);
  }
  void set_lazy(bool lazy) { lazy_ = lazy; }

  /// ROI must stay within the bounding box.
  void set_roi(const BoundingBox& roi);

  /// The bb2Id map: chunk lookup by bounding box.
  const std::map<BoundingBox, Chunk>& chunks() const { return chunks_; }

  /// Inserts (or replaces, on equal bbox) a chunk. Chunk ids are assigned
  /// sequentially per region in insertion order. Dense payload length must be
  /// volume * element size; the chunk box must lie inside the region box.
  Chunk& put_chunk(const BoundingBox& box, std::vector<std::uint8_t> payload);

  const Chunk* find_chunk(const BoundingBox& box) const;

  /// Drops all payload, returning the region to its metadata-only state.
  void drop_payload();

  std::uint64_t payload_bytes() const;

  bool operator==(const DataRegion& other) const;

 private:
  DataRegionId id_;
  RegionKind kind_ = RegionKind::kDense2D;
  ElementKind element_kind_ = ElementKind::kU8;
  BoundingBox bbox_;
  BoundingBox roi_;
  IoMode io_mode_ = IoMode::kInput;
  std::string storage_binding_;
  bool lazy_ = false;
  bool materialized_ = false;
  std::uint64_t next_chunk_id_ = 0;
  std::map<BoundingBox, Chunk> chunks_;
};

/// Contracts the ROI by `ghost` cells on every face of every axis, modeling
/// ghost-cell removal before staging. The bounding box is untouched. Throws
/// EmptyRoiError when any axis would invert.
DataRegion shrink_roi(const DataRegion& region,
                      std::span<const std::int64_t> ghost);
DataRegion shrink_roi(const DataRegion& region, std::int64_t ghost_all_axes);

/// Copies the overlap of src_box into dst_box, element-wise, row-major with
/// the last axis contiguous. No-op when the boxes are disjoint.
void copy_box_overlap(std::span<std::uint8_t> dst, const BoundingBox& dst_box,
                      std::span<const std::uint8_t> src,
                      const BoundingBox& src_box, std::size_t elem_size);

}  // namespace rt

#endif  // RT_DATA_REGION_HPP
