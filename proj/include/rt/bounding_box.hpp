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

#ifndef RT_BOUNDING_BOX_HPP
#define RT_BOUNDING_BOX_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "rt/error.hpp"

namespace rt {

/// N-dimensional integer axis-aligned box, inclusive on both ends.
///
/// Up to three spatial axes plus one trailing temporal axis. Coordinates are
/// signed 64-bit; <0,0;99,99> spans a 100x100 region. A default-constructed
/// box has dims() == 0 and acts as the empty sentinel: it is the identity of
/// unioned() and contains nothing.
class BoundingBox {
 public:
  static constexpr int kMaxDims = 4;

  BoundingBox() = default;

  /// Box from per-axis inclusive bounds; lo[i] <= hi[i] is required.
  BoundingBox(std::initializer_list<std::int64_t> lo,
              std::initializer_list<std::int64_t> hi);
  BoundingBox(int dims, const std::int64_t* lo, const std::int64_t* hi);

  /// 1-D convenience.
  static BoundingBox interval(std::int64_t lo, std::int64_t hi) {
    return BoundingBox({lo}, {hi});
  }

  int dims() const { return dims_; }
  bool empty() const { return dims_ == 0; }

  std::int64_t lo(int axis) const { return lo_[check_axis(axis)]; }
  std::int64_t hi(int axis) const { return hi_[check_axis(axis)]; }

  /// Inclusive extent along an axis: hi - lo + 1.
  std::int64_t extent(int axis) const {
    check_axis(axis);
    return hi_[axis] - lo_[axis] + 1;
  }

  /// Number of integer cells covered. The empty box has volume 0.
  std::int64_t volume() const;

  bool contains(const BoundingBox& other) const;
  bool contains_point(const std::int64_t* p, int dims) const;
  bool intersects(const BoundingBox& other) const;

  /// Minimal box enclosing this and other. The empty box is the identity.
  BoundingBox unioned(const BoundingBox& other) const;

  /// Maximal box contained in both, or nullopt when disjoint.
  std::optional<BoundingBox> intersected(const BoundingBox& other) const;

  bool operator==(const BoundingBox& other) const;
  bool operator!=(const BoundingBox& other) const { return !(*this == other); }

  /// Total order for use as a map key: dims, then lo/hi lexicographic.
  bool operator<(const BoundingBox& other) const;

  /// "<l0,l1;h0,h1>" rendering, "<empty>" for the sentinel.
  std::string to_string() const;

 private:
  int check_axis(int axis) const;
  void check_same_dims(const BoundingBox& other) const;

  int dims_ = 0;
  std::array<std::int64_t, kMaxDims> lo_{};
  std::array<std::int64_t, kMaxDims> hi_{};
};

/// Free-function spellings used throughout the storage and index layers.
inline BoundingBox bbox_union(const BoundingBox& a, const BoundingBox& b) {
  return a.unioned(b);
}
inline std::optional<BoundingBox> bbox_intersect(const BoundingBox& a,
                                                 const BoundingBox& b) {
  return a.intersected(b);
}

}  // namespace rt

#endif  // RT_BOUNDING_BOX_HPP
