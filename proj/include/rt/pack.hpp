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

#ifndef RT_PACK_HPP
#define RT_PACK_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "rt/region_template.hpp"

namespace rt {

// Wire format (all integers little-endian):
//
//   template := magic u32 ("RTP1") | flags u8 | name str | bbox
//             | region_count u32 | region*
//   str      := len u32 | bytes
//   bbox     := dims u8 | lo i64 * dims | hi i64 * dims
//   region   := ns str | key str | type_tag str | timestamp i64 | version i64
//             | kind u8 | element_kind u8 | io_mode u8 | lazy u8
//             | materialized u8 | bbox | roi bbox | storage_binding str
//             | chunk_count u32 | chunk*
//   chunk    := chunk_id u64 | bbox | payload_len u64 | payload bytes
//
// flags bit 0 set means chunk payloads travel with the buffer. When clear the
// pack is metadata-only: chunk_count is written as 0 and materialized as 0,
// so unpacked regions arrive lazy (materialized() == false, no chunks).

inline constexpr std::uint32_t kPackMagic = 0x31505452;  // "RTP1"

std::vector<std::uint8_t> pack_template(const RegionTemplate& t,
                                        bool include_payload);

/// Throws DecodeError on truncated or corrupt buffers.
RegionTemplate unpack_template(std::span<const std::uint8_t> bytes);

}  // namespace rt

#endif  // RT_PACK_HPP
