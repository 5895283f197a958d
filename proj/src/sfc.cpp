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

#include "rt/sfc.hpp"

#include <algorithm>
#include <string>

namespace rt::sfc {

namespace {

// Gray-code machinery for the per-point curve walk. The curve state is the
// (entry corner, direction) pair accumulated across refinement levels.

std::uint64_t gray(std::uint64_t i) { return i ^ (i >> 1); }

std::uint64_t gray_inverse(std::uint64_t g) {
  std::uint64_t i = g;
  while (g >>= 1) i ^= g;
  return i;
}

int trailing_set_bits(std::uint64_t i) {
  int n = 0;
  while (i & 1) {
    ++n;
    i >>= 1;
  }
  return n;
}

std::uint64_t rotr_bits(std::uint64_t x, int k, int n) {
  k %= n;
  const std::uint64_t mask = (std::uint64_t(1) << n) - 1;
  return ((x >> k) | (x << (n - k))) & mask;
}

std::uint64_t rotl_bits(std::uint64_t x, int k, int n) {
  return rotr_bits(x, n - (k % n), n);
}

std::uint64_t subcube_entry(std::uint64_t i) {
  if (i == 0) return 0;
  return gray(2 * ((i - 1) / 2));
}

int subcube_direction(std::uint64_t i, int n) {
  if (i == 0) return 0;
  if (i % 2 == 0) return trailing_set_bits(i - 1) % n;
  return trailing_set_bits(i) % n;
}

}  // namespace

void HilbertParams::validate() const {
  if (dims < 2 || dims > 3) {
    throw RangeError("hilbert dims must be 2 or 3, got " +
                     std::to_string(dims));
  }
  if (order < 1 || order > 20 || dims * order > 63) {
    throw RangeError("hilbert order out of range: dims " +
                     std::to_string(dims) + " order " + std::to_string(order));
  }
}

std::uint64_t sfc_encode(std::span<const std::uint64_t> point,
                         const HilbertParams& params) {
  params.validate();
  if (point.size() != std::size_t(params.dims)) {
    throw RangeError("point rank does not match hilbert dims");
  }
  for (auto c : point) {
    if (c >= params.grid_side()) {
      throw RangeError("point coordinate outside the hilbert grid");
    }
  }
  const int dims = params.dims;
  std::uint64_t h = 0;
  std::uint64_t e = 0;
  int d = 0;
  for (int i = params.order - 1; i >= 0; --i) {
    std::uint64_t l = 0;
    for (int k = 0; k < dims; ++k) {
      l |= ((point[std::size_t(k)] >> i) & 1) << k;
    }
    l = rotr_bits(l ^ e, d + 1, dims);
    const std::uint64_t w = gray_inverse(l);
    h = (h << dims) | w;
    e ^= rotl_bits(subcube_entry(w), d + 1, dims);
    d = (d + subcube_direction(w, dims) + 1) % dims;
  }
  return h;
}

std::vector<std::uint64_t> sfc_decode(std::uint64_t h,
                                      const HilbertParams& params) {
  params.validate();
  if (h >= params.cell_count()) {
    throw RangeError("hilbert index exceeds the grid");
  }
  const int dims = params.dims;
  std::vector<std::uint64_t> point(std::size_t(dims), 0);
  std::uint64_t e = 0;
  int d = 0;
  for (int i = params.order - 1; i >= 0; --i) {
    const std::uint64_t w = (h >> (i * dims)) & ((std::uint64_t(1) << dims) - 1);
    std::uint64_t l = rotl_bits(gray(w), d + 1, dims) ^ e;
    for (int k = 0; k < dims; ++k) {
      point[std::size_t(k)] |= ((l >> k) & 1) << i;
    }
    e ^= rotl_bits(subcube_entry(w), d + 1, dims);
    d = (d + subcube_direction(w, dims) + 1) % dims;
  }
  return point;
}

std::vector<SfcInterval> bbox_to_intervals(const BoundingBox& box,
                                           const HilbertParams& params) {
  params.validate();
  if (box.empty() || box.dims() != params.dims) {
    throw RangeError("box rank does not match hilbert dims");
  }
  for (int a = 0; a < box.dims(); ++a) {
    if (box.lo(a) < 0 || std::uint64_t(box.hi(a)) >= params.grid_side()) {
      throw RangeError("box escapes the hilbert grid: " + box.to_string());
    }
  }

  // Encode every cell, sort, merge runs. Cell counts here are chunk-grid
  // sized, not pixel sized, so the brute walk is fine.
  std::vector<std::uint64_t> indices;
  indices.reserve(std::size_t(box.volume()));
  std::vector<std::uint64_t> point(std::size_t(box.dims()));
  for (int a = 0; a < box.dims(); ++a) point[std::size_t(a)] =
      std::uint64_t(box.lo(a));
  while (true) {
    indices.push_back(sfc_encode(point, params));
    int a = box.dims() - 1;
    for (; a >= 0; --a) {
      if (std::int64_t(++point[std::size_t(a)]) <= box.hi(a)) break;
      point[std::size_t(a)] = std::uint64_t(box.lo(a));
    }
    if (a < 0) break;
  }
  std::sort(indices.begin(), indices.end());

  std::vector<SfcInterval> out;
  for (auto idx : indices) {
    if (!out.empty() && out.back().end + 1 == idx) {
      out.back().end = idx;
    } else {
      out.push_back({idx, idx});
    }
  }
  return out;
}

VirtualDomainMap::VirtualDomainMap(
    std::vector<SfcInterval> occupied_sorted_disjoint)
    : occupied_(std::move(occupied_sorted_disjoint)) {
  offsets_.reserve(occupied_.size());
  for (std::size_t i = 0; i < occupied_.size(); ++i) {
    if (i > 0 && occupied_[i].start <= occupied_[i - 1].end) {
      throw RangeError("occupied intervals must be sorted and disjoint");
    }
    offsets_.push_back(total_);
    total_ += occupied_[i].length();
  }
}

std::uint64_t VirtualDomainMap::to_virtual(std::uint64_t raw) const {
  // Last interval with start <= raw.
  auto it = std::upper_bound(
      occupied_.begin(), occupied_.end(), raw,
      [](std::uint64_t v, const SfcInterval& iv) { return v < iv.start; });
  if (it == occupied_.begin()) {
    throw NotOccupiedError("curve index " + std::to_string(raw) +
                           " is not in the occupied domain");
  }
  const std::size_t i = std::size_t(std::distance(occupied_.begin(), it)) - 1;
  if (raw > occupied_[i].end) {
    throw NotOccupiedError("curve index " + std::to_string(raw) +
                           " is not in the occupied domain");
  }
  return offsets_[i] + (raw - occupied_[i].start);
}

bool VirtualDomainMap::is_occupied(std::uint64_t raw) const {
  auto it = std::upper_bound(
      occupied_.begin(), occupied_.end(), raw,
      [](std::uint64_t v, const SfcInterval& iv) { return v < iv.start; });
  if (it == occupied_.begin()) return false;
  return raw <= std::prev(it)->end;
}

VirtualDomainMap build_virtual_map(std::span<const BoundingBox> boxes,
                                   const HilbertParams& params) {
  std::vector<SfcInterval> all;
  for (const auto& box : boxes) {
    auto part = bbox_to_intervals(box, params);
    all.insert(all.end(), part.begin(), part.end());
  }
  std::sort(all.begin(), all.end());
  std::vector<SfcInterval> merged;
  for (const auto& iv : all) {
    if (!merged.empty() && iv.start <= merged.back().end + 1) {
      merged.back().end = std::max(merged.back().end, iv.end);
    } else {
      merged.push_back(iv);
    }
  }
  return VirtualDomainMap(std::move(merged));
}

ShardTable::ShardTable(std::uint64_t total, int shard_count)
    : total_(total), shard_count_(shard_count) {
  if (shard_count < 1) throw RangeError("shard_count must be >= 1");
  boundaries_.resize(std::size_t(shard_count) + 1);
  const std::uint64_t base = total / std::uint64_t(shard_count);
  const std::uint64_t extra = total % std::uint64_t(shard_count);
  std::uint64_t pos = 0;
  for (int s = 0; s < shard_count; ++s) {
    boundaries_[std::size_t(s)] = pos;
    pos += base + (std::uint64_t(s) < extra ? 1 : 0);
  }
  boundaries_[std::size_t(shard_count)] = pos;
}

std::pair<std::uint64_t, std::uint64_t> ShardTable::slice(int shard) const {
  if (shard < 0 || shard >= shard_count_) {
    throw RangeError("shard id out of range");
  }
  return {boundaries_[std::size_t(shard)], boundaries_[std::size_t(shard) + 1]};
}

int ShardTable::owner_of_virtual(std::uint64_t v) const {
  if (v >= total_) throw RangeError("virtual index exceeds the domain");
  auto it = std::upper_bound(boundaries_.begin(), boundaries_.end(), v);
  return int(std::distance(boundaries_.begin(), it)) - 1;
}

std::set<int> owner_shards(const BoundingBox& box,
                           const VirtualDomainMap& vmap,
                           const ShardTable& shards,
                           const HilbertParams& params) {
  std::set<int> owners;
  for (const auto& iv : bbox_to_intervals(box, params)) {
    for (std::uint64_t raw = iv.start; raw <= iv.end; ++raw) {
      owners.insert(shards.owner_of_virtual(vmap.to_virtual(raw)));
    }
  }
  return owners;
}

}  // namespace rt::sfc
