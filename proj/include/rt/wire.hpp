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

#ifndef RT_WIRE_HPP
#define RT_WIRE_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rt/bounding_box.hpp"
#include "rt/error.hpp"

namespace rt::wire {

/// Little-endian byte-buffer writer shared by the template pack format and
/// the shard service protocol.
class Writer {
 public:
  std::vector<std::uint8_t> take() { return std::move(buf_); }
  const std::vector<std::uint8_t>& buffer() const { return buf_; }

  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(std::uint8_t(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(std::uint8_t(v >> (8 * i)));
  }
  void i64(std::int64_t v) { u64(std::uint64_t(v)); }
  void str(const std::string& s) {
    u32(std::uint32_t(s.size()));
    buf_.insert(buf_.end(), s.begin(), s.end());
  }
  void bytes(std::span<const std::uint8_t> b) {
    buf_.insert(buf_.end(), b.begin(), b.end());
  }
  void bbox(const BoundingBox& box) {
    u8(std::uint8_t(box.dims()));
    for (int a = 0; a < box.dims(); ++a) i64(box.lo(a));
    for (int a = 0; a < box.dims(); ++a) i64(box.hi(a));
  }

 private:
  std::vector<std::uint8_t> buf_;
};

/// Matching reader; every accessor throws DecodeError on truncation.
class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> buf) : buf_(buf) {}

  bool done() const { return pos_ == buf_.size(); }

  std::uint8_t u8() {
    need(1);
    return buf_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(buf_[pos_++]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(buf_[pos_++]) << (8 * i);
    return v;
  }
  std::int64_t i64() { return std::int64_t(u64()); }
  std::string str() {
    const std::uint32_t len = u32();
    need(len);
    std::string s(reinterpret_cast<const char*>(buf_.data() + pos_), len);
    pos_ += len;
    return s;
  }
  std::vector<std::uint8_t> bytes(std::uint64_t len) {
    need(len);
    std::vector<std::uint8_t> b(buf_.begin() + std::ptrdiff_t(pos_),
                                buf_.begin() + std::ptrdiff_t(pos_ + len));
    pos_ += len;
    return b;
  }
  BoundingBox bbox() {
    const int dims = u8();
    if (dims == 0) return BoundingBox();
    if (dims > BoundingBox::kMaxDims) {
      throw DecodeError("bounding box rank out of range");
    }
    std::vector<std::int64_t> lo(std::size_t(dims), 0);
    std::vector<std::int64_t> hi(std::size_t(dims), 0);
    for (int a = 0; a < dims; ++a) lo[std::size_t(a)] = i64();
    for (int a = 0; a < dims; ++a) hi[std::size_t(a)] = i64();
    return BoundingBox(dims, lo.data(), hi.data());
  }

 private:
  void need(std::uint64_t n) const {
    if (pos_ + n > buf_.size()) throw DecodeError("buffer truncated");
  }

  std::span<const std::uint8_t> buf_;
  std::size_t pos_ = 0;
};

}  // namespace rt::wire

#endif  // RT_WIRE_HPP
