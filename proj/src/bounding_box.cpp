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

#include "rt/bounding_box.hpp"

#include <algorithm>
#include <sstream>

namespace rt {

BoundingBox::BoundingBox(std::initializer_list<std::int64_t> lo,
                         std::initializer_list<std::int64_t> hi)
    : BoundingBox(static_cast<int>(lo.size()), lo.begin(), hi.begin()) {
  if (lo.size() != hi.size()) {
    throw DimensionError("bounding box lo/hi rank mismatch");
  }
}

BoundingBox::BoundingBox(int dims, const std::int64_t* lo,
                         const std::int64_t* hi) {
  if (dims < 0 || dims > kMaxDims) {
    throw DimensionError("bounding box rank must be 0..4, got " +
                         std::to_string(dims));
  }
  dims_ = dims;
  for (int i = 0; i < dims; ++i) {
    if (lo[i] > hi[i]) {
      throw DimensionError("bounding box lo > hi on axis " +
                           std::to_string(i));
    }
    lo_[i] = lo[i];
    hi_[i] = hi[i];
  }
}

int BoundingBox::check_axis(int axis) const {
  if (axis < 0 || axis >= dims_) {
    throw DimensionError("axis " + std::to_string(axis) +
                         " out of range for rank " + std::to_string(dims_));
  }
  return axis;
}

void BoundingBox::check_same_dims(const BoundingBox& other) const {
  if (dims_ != other.dims_) {
    throw DimensionError("rank mismatch: " + std::to_string(dims_) + " vs " +
                         std::to_string(other.dims_));
  }
}

std::int64_t BoundingBox::volume() const {
  if (dims_ == 0) return 0;
  std::int64_t v = 1;
  for (int i = 0; i < dims_; ++i) v *= extent(i);
  return v;
}

bool BoundingBox::contains(const BoundingBox& other) const {
  if (other.empty()) return true;
  check_same_dims(other);
  for (int i = 0; i < dims_; ++i) {
    if (other.lo_[i] < lo_[i] || other.hi_[i] > hi_[i]) return false;
  }
  return true;
}

bool BoundingBox::contains_point(const std::int64_t* p, int dims) const {
  if (dims != dims_) {
    throw DimensionError("point rank mismatch");
  }
  for (int i = 0; i < dims_; ++i) {
    if (p[i] < lo_[i] || p[i] > hi_[i]) return false;
  }
  return true;
}

bool BoundingBox::intersects(const BoundingBox& other) const {
  if (empty() || other.empty()) return false;
  check_same_dims(other);
  for (int i = 0; i < dims_; ++i) {
    if (other.hi_[i] < lo_[i] || other.lo_[i] > hi_[i]) return false;
  }
  return true;
}

BoundingBox BoundingBox::unioned(const BoundingBox& other) const {
  if (empty()) return other;
  if (other.empty()) return *this;
  check_same_dims(other);
  BoundingBox out = *this;
  for (int i = 0; i < dims_; ++i) {
    out.lo_[i] = std::min(lo_[i], other.lo_[i]);
    out.hi_[i] = std::max(hi_[i], other.hi_[i]);
  }
  return out;
}

std::optional<BoundingBox> BoundingBox::intersected(
    const BoundingBox& other) const {
  if (empty() || other.empty()) return std::nullopt;
  check_same_dims(other);
  BoundingBox out = *this;
  for (int i = 0; i < dims_; ++i) {
    out.lo_[i] = std::max(lo_[i], other.lo_[i]);
    out.hi_[i] = std::min(hi_[i], other.hi_[i]);
    if (out.lo_[i] > out.hi_[i]) return std::nullopt;
  }
  return out;
}

bool BoundingBox::operator==(const BoundingBox& other) const {
  if (dims_ != other.dims_) return false;
  for (int i = 0; i < dims_; ++i) {
    if (lo_[i] != other.lo_[i] || hi_[i] != other.hi_[i]) return false;
  }
  return true;
}

bool BoundingBox::operator<(const BoundingBox& other) const {
  if (dims_ != other.dims_) return dims_ < other.dims_;
  for (int i = 0; i < dims_; ++i) {
    if (lo_[i] != other.lo_[i]) return lo_[i] < other.lo_[i];
    if (hi_[i] != other.hi_[i]) return hi_[i] < other.hi_[i];
  }
  return false;
}

std::string BoundingBox::to_string() const {
  if (empty()) return "<empty>";
  std::ostringstream os;
  os << '<';
  for (int i = 0; i < dims_; ++i) os << (i ? "," : "") << lo_[i];
  os << ';';
  for (int i = 0; i < dims_; ++i) os << (i ? "," : "") << hi_[i];
  os << '>';
  return os.str();
}

}  // namespace rt
