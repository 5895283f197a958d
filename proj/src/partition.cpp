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

#include "rt/partition.hpp"

#include <algorithm>

#include "rt/error.hpp"

namespace rt {

std::vector<BoundingBox> partition_regular(const BoundingBox& box,
                                           std::span<const std::int64_t> tile) {
  if (box.empty()) return {};
  if (tile.size() != std::size_t(box.dims())) {
    throw PartitionError("tile rank does not match the box");
  }
  for (auto t : tile) {
    if (t <= 0) throw PartitionError("tile extents must be positive");
  }

  const int dims = box.dims();
  std::vector<std::int64_t> lo(std::size_t(dims), 0);
  for (int a = 0; a < dims; ++a) lo[a] = box.lo(a);

  std::vector<BoundingBox> out;
  while (true) {
    std::vector<std::int64_t> hi(std::size_t(dims), 0);
    for (int a = 0; a < dims; ++a) {
      hi[a] = std::min(lo[a] + tile[a] - 1, box.hi(a));
    }
    out.emplace_back(dims, lo.data(), hi.data());
    // Row-major odometer: advance the last axis first.
    int a = dims - 1;
    for (; a >= 0; --a) {
      lo[a] += tile[a];
      if (lo[a] <= box.hi(a)) break;
      lo[a] = box.lo(a);
    }
    if (a < 0) break;
  }
  return out;
}

std::vector<BoundingBox> partition_regular(
    const BoundingBox& box, std::initializer_list<std::int64_t> tile) {
  return partition_regular(box, std::span<const std::int64_t>(tile));
}

std::vector<BoundingBox> partition_custom(const BoundingBox& box,
                                          std::vector<BoundingBox> boxes) {
  for (const auto& b : boxes) {
    if (b.empty() || box.empty() || !box.contains(b)) {
      throw PartitionError("partition box escapes the source bounding box: " +
                           b.to_string());
    }
  }
  return boxes;
}

}  // namespace rt
