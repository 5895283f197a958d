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

#ifndef RT_PARTITION_HPP
#define RT_PARTITION_HPP

#include <span>
#include <vector>

#include "rt/bounding_box.hpp"

namespace rt {

/// Tiles `box` into a regular grid with the given per-axis tile extents.
/// Tiles at the high edge are clamped, so edge tiles may be smaller. The
/// result is a pairwise-disjoint exact cover of `box`, ordered row-major
/// (last axis fastest). Throws PartitionError on non-positive extents.
std::vector<BoundingBox> partition_regular(
    const BoundingBox& box, std::span<const std::int64_t> tile);
std::vector<BoundingBox> partition_regular(
    const BoundingBox& box, std::initializer_list<std::int64_t> tile);

/// Validates a caller-supplied partition: every box must lie inside `box`.
/// Overlap between boxes is allowed; consumers resolve it through dependency
/// declarations and write ordering. Throws PartitionError on escape.
std::vector<BoundingBox> partition_custom(const BoundingBox& box,
                                          std::vector<BoundingBox> boxes);

}  // namespace rt

#endif  // RT_PARTITION_HPP
