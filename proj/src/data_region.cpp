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

#include "rt/data_region.hpp"

#include <cstring>
#include <sstream>

namespace rt {

std::string DataRegionId::to_string() const {
  std::ostringstream out;
  out << ns << "::" << key << "/" << type_tag << "@t" << timestamp << "v"
      << version;
  return out.str();
}

std::size_t element_size(ElementKind kind) {
  switch (kind) {
    case ElementKind::kU8:
      return 1;
    case ElementKind::kU16:
      return 2;
    case ElementKind::kI32:
    case ElementKind::kF32:
      return 4;
    case ElementKind::kF64:
      return 8;
  }
  throw DimensionError("unknown element kind");
}

bool is_dense(RegionKind kind) {
  return kind == RegionKind::kDense1D || kind == RegionKind::kDense2D ||
         kind == RegionKind::kDense3D;
}

int dense_rank(RegionKind kind) {
  switch (kind) {
    case RegionKind::kDense1D:
      return 1;
    case RegionKind::kDense2D:
      return 2;
    case RegionKind::kDense3D:
      return 3;
    default:
      throw DimensionError("dense_rank: not a dense region kind");
  }
}

const char* to_string(RegionKind kind) {
  switch (kind) {
    case RegionKind::kDense1D:
      return "dense1d";
    case RegionKind::kDense2D:
      return "dense2d";
    case RegionKind::kDense3D:
      return "dense3d";
    case RegionKind::kSparse:
      return "sparse";
    case RegionKind::kPolygon:
      return "polygon";
  }
  return "unknown";
}

const char* to_string(ElementKind kind) {
  switch (kind) {
    case ElementKind::kU8:
      return "u8";
    case ElementKind::kU16:
      return "u16";
    case ElementKind::kI32:
      return "i32";
    case ElementKind::kF32:
      return "f32";
    case ElementKind::kF64:
      return "f64";
  }
  return "unknown";
}

const char* to_string(IoMode mode) {
  switch (mode) {
    case IoMode::kInput:
      return "input";
    case IoMode::kOutput:
      return "output";
    case IoMode::kInputOutput:
      return "input_output";
  }
  return "unknown";
}

std::vector<std::uint8_t> encode_polygon(
    std::span<const std::array<std::int64_t, 2>> vertices) {
  std::vector<std::uint8_t> out;
  out.reserve(4 + vertices.size() * 16);
  auto push_u32 = [&out](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(std::uint8_t(v >> (8 * i)));
  };
  auto push_i64 = [&out](std::int64_t v) {
    auto u = std::uint64_t(v);
    for (int i = 0; i < 8; ++i) out.push_back(std::uint8_t(u >> (8 * i)));
  };
  push_u32(std::uint32_t(vertices.size()));
  for (const auto& v : vertices) {
    push_i64(v[0]);
    push_i64(v[1]);
  }
  return out;
}

std::vector<std::array<std::int64_t, 2>> decode_polygon(
    std::span<const std::uint8_t> payload) {
  if (payload.size() < 4) throw DecodeError("polygon payload truncated");
  std::uint32_t count = 0;
  for (int i = 0; i < 4; ++i) count |= std::uint32_t(payload[i]) << (8 * i);
  if (payload.size() != 4 + std::size_t(count) * 16) {
    throw DecodeError("polygon payload length mismatch");
  }
  std::vector<std::array<std::int64_t, 2>> vertices(count);
  std::size_t pos = 4;
  for (std::uint32_t i = 0; i < count; ++i) {
    for (int c = 0; c < 2; ++c) {
      std::uint64_t u = 0;
      for (int b = 0; b < 8; ++b) u |= std::uint64_t(payload[pos++]) << (8 * b);
      vertices[i][c] = std::int64_t(u);
    }
  }
  return vertices;
}

DataRegion::DataRegion(DataRegionId id, RegionKind kind,
                       ElementKind element_kind, BoundingBox bbox)
    : id_(std::move(id)),
      kind_(kind),
      element_kind_(element_kind),
      bbox_(std::move(bbox)),
      roi_(bbox_) {
  if (is_dense(kind_) && !bbox_.empty() && bbox_.dims() != dense_rank(kind_)) {
    // Dense regions may carry one extra trailing axis for time.
    if (bbox_.dims() != dense_rank(kind_) + 1) {
      throw DimensionError("data region box rank does not match its kind");
    }
  }
}

void DataRegion::set_roi(const BoundingBox& roi) {
  if (roi.empty()) {
    roi_ = roi;
    return;
  }
  if (bbox_.empty() || !bbox_.contains(roi)) {
    throw DimensionError("roi must lie inside the region bounding box");
  }
  roi_ = roi;
}

Chunk& DataRegion::put_chunk(const BoundingBox& box,
                             std::vector<std::uint8_t> payload) {
  if (box.empty()) throw DimensionError("cannot store an empty chunk box");
  if (bbox_.empty() || !bbox_.contains(box)) {
    throw DimensionError("chunk box escapes the region bounding box");
  }
  if (is_dense(kind_)) {
    const auto want = std::uint64_t(box.volume()) * element_size(element_kind_);
    if (payload.size() != want) {
      throw DimensionError("dense chunk payload length mismatch");
    }
  }
  auto [it, inserted] = chunks_.try_emplace(box);
  if (inserted) {
    it->second.chunk_id = next_chunk_id_++;
  }
  it->second.bbox = box;
  it->second.element_kind = element_kind_;
  it->second.payload = std::move(payload);
  materialized_ = true;
  return it->second;
}

const Chunk* DataRegion::find_chunk(const BoundingBox& box) const {
  auto it = chunks_.find(box);
  return it == chunks_.end() ? nullptr : &it->second;
}

void DataRegion::drop_payload() {
  chunks_.clear();
  materialized_ = false;
}

std::uint64_t DataRegion::payload_bytes() const {
  std::uint64_t total = 0;
  for (const auto& [box, chunk] : chunks_) total += chunk.payload.size();
  return total;
}

bool DataRegion::operator==(const DataRegion& other) const {
  if (!(id_ == other.id_) || kind_ != other.kind_ ||
      element_kind_ != other.element_kind_ || !(bbox_ == other.bbox_) ||
      !(roi_ == other.roi_) || io_mode_ != other.io_mode_ ||
      storage_binding_ != other.storage_binding_ || lazy_ != other.lazy_ ||
      materialized_ != other.materialized_ ||
      chunks_.size() != other.chunks_.size()) {
    return false;
  }
  for (auto it = chunks_.begin(), jt = other.chunks_.begin();
       it != chunks_.end(); ++it, ++jt) {
    if (!(it->first == jt->first) || it->second.payload != jt->second.payload) {
      return false;
    }
  }
  return true;
}

DataRegion shrink_roi(const DataRegion& region,
                      std::span<const std::int64_t> ghost) {
  const BoundingBox& roi = region.roi();
  if (roi.empty()) throw EmptyRoiError("cannot shrink an empty roi");
  if (ghost.size() != std::size_t(roi.dims())) {
    throw DimensionError("ghost width rank does not match the roi");
  }
  std::vector<std::int64_t> lo(roi.dims()), hi(roi.dims());
  for (int a = 0; a < roi.dims(); ++a) {
    if (ghost[a] < 0) throw DimensionError("ghost widths must be >= 0");
    lo[a] = roi.lo(a) + ghost[a];
    hi[a] = roi.hi(a) - ghost[a];
    if (lo[a] > hi[a]) {
      throw EmptyRoiError("ghost shrink empties the roi");
    }
  }
  DataRegion out = region;
  out.set_roi(BoundingBox(roi.dims(), lo.data(), hi.data()));
  return out;
}

DataRegion shrink_roi(const DataRegion& region, std::int64_t ghost_all_axes) {
  const BoundingBox& roi = region.roi();
  if (roi.empty()) throw EmptyRoiError("cannot shrink an empty roi");
  std::vector<std::int64_t> ghost(std::size_t(roi.dims()), ghost_all_axes);
  return shrink_roi(region, ghost);
}

namespace {

std::uint64_t row_major_offset(const BoundingBox& box,
                               std::span<const std::int64_t> point) {
  std::uint64_t offset = 0;
  for (int a = 0; a < box.dims(); ++a) {
    offset = offset * std::uint64_t(box.extent(a)) +
             std::uint64_t(point[a] - box.lo(a));
  }
  return offset;
}

}  // namespace

void copy_box_overlap(std::span<std::uint8_t> dst, const BoundingBox& dst_box,
                      std::span<const std::uint8_t> src,
                      const BoundingBox& src_box, std::size_t elem_size) {
  auto overlap = bbox_intersect(dst_box, src_box);
  if (!overlap) return;
  const BoundingBox& ov = *overlap;
  const int dims = ov.dims();
  const int last = dims - 1;
  const std::size_t row_bytes = std::size_t(ov.extent(last)) * elem_size;

  std::vector<std::int64_t> point(std::size_t(dims), 0);
  for (int a = 0; a < dims; ++a) point[std::size_t(a)] = ov.lo(a);

  while (true) {
    const std::uint64_t so = row_major_offset(src_box, point) * elem_size;
    const std::uint64_t do_ = row_major_offset(dst_box, point) * elem_size;
    std::memcpy(dst.data() + do_, src.data() + so, row_bytes);
    // Advance the odometer over all axes but the contiguous last one.
    int a = last - 1;
    for (; a >= 0; --a) {
      if (++point[std::size_t(a)] <= ov.hi(a)) break;
      point[std::size_t(a)] = ov.lo(a);
    }
    if (a < 0) break;
  }
}

}  // namespace rt
