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

#include "rt/pack.hpp"

#include "rt/wire.hpp"

namespace rt {

namespace {

using ByteWriter = wire::Writer;
using ByteReader = wire::Reader;

template <typename Enum>
Enum checked_enum(std::uint8_t raw, std::uint8_t max, const char* what) {
  if (raw > max) throw DecodeError(std::string("bad enum value for ") + what);
  return Enum(raw);
}

}  // namespace

std::vector<std::uint8_t> pack_template(const RegionTemplate& t,
                                        bool include_payload) {
  ByteWriter w;
  w.u32(kPackMagic);
  w.u8(include_payload ? 1 : 0);
  w.str(t.name());
  w.bbox(t.bbox());
  w.u32(std::uint32_t(t.regions().size()));
  for (const auto& [id, region] : t.regions()) {
    w.str(id.ns);
    w.str(id.key);
    w.str(id.type_tag);
    w.i64(id.timestamp);
    w.i64(id.version);
    w.u8(std::uint8_t(region.kind()));
    w.u8(std::uint8_t(region.element_kind()));
    w.u8(std::uint8_t(region.io_mode()));
    w.u8(region.lazy() ? 1 : 0);
    w.u8(include_payload && region.materialized() ? 1 : 0);
    w.bbox(region.bbox());
    w.bbox(region.roi());
    w.str(region.storage_binding());
    if (include_payload) {
      w.u32(std::uint32_t(region.chunks().size()));
      for (const auto& [box, chunk] : region.chunks()) {
        w.u64(chunk.chunk_id);
        w.bbox(box);
        w.u64(chunk.payload.size());
        w.bytes(chunk.payload);
      }
    } else {
      w.u32(0);
    }
  }
  return w.take();
}

namespace {

RegionTemplate unpack_template_impl(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (r.u32() != kPackMagic) throw DecodeError("bad magic");
  const std::uint8_t flags = r.u8();
  if (flags > 1) throw DecodeError("bad flags");
  RegionTemplate t(r.str());
  const BoundingBox declared_bbox = r.bbox();
  const std::uint32_t region_count = r.u32();
  for (std::uint32_t i = 0; i < region_count; ++i) {
    DataRegionId id;
    id.ns = r.str();
    id.key = r.str();
    id.type_tag = r.str();
    id.timestamp = r.i64();
    id.version = r.i64();
    const auto kind = checked_enum<RegionKind>(r.u8(), 4, "region kind");
    const auto elem = checked_enum<ElementKind>(r.u8(), 4, "element kind");
    const auto io = checked_enum<IoMode>(r.u8(), 2, "io mode");
    const bool lazy = r.u8() != 0;
    const bool materialized = r.u8() != 0;
    const BoundingBox box = r.bbox();
    const BoundingBox roi = r.bbox();
    std::string binding = r.str();
    DataRegion region(std::move(id), kind, elem, box);
    region.set_roi(roi);
    region.set_io_mode(io);
    region.set_lazy(lazy);
    region.set_storage_binding(std::move(binding));
    const std::uint32_t chunk_count = r.u32();
    for (std::uint32_t c = 0; c < chunk_count; ++c) {
      const std::uint64_t chunk_id = r.u64();
      const BoundingBox cbox = r.bbox();
      const std::uint64_t len = r.u64();
      // Ids are re-assigned in map order; keep the original wire id.
      region.put_chunk(cbox, r.bytes(len)).chunk_id = chunk_id;
    }
    if (materialized != region.materialized()) {
      throw DecodeError("materialized flag disagrees with chunk payload");
    }
    t.insert_data_region(std::move(region));
  }
  if (!r.done()) throw DecodeError("trailing bytes after template");
  if (!(t.bbox() == declared_bbox)) {
    throw DecodeError("declared template box disagrees with regions");
  }
  return t;
}

}  // namespace

RegionTemplate unpack_template(std::span<const std::uint8_t> bytes) {
  try {
    return unpack_template_impl(bytes);
  } catch (const DecodeError&) {
    throw;
  } catch (const Error& e) {
    // Any structural violation reached through a decoded buffer is corruption.
    throw DecodeError(std::string("corrupt template buffer: ") + e.what());
  }
}

}  // namespace rt
