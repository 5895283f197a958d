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

#ifndef RT_TRACE_HPP
#define RT_TRACE_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace rt {

/// Logical simulated time source. Backends and the runtime read it; only the
/// event loop (or a test) advances it.
class Clock {
 public:
  double now() const { return now_; }
  void set(double t) { now_ = t; }

 private:
  double now_ = 0.0;
};

/// One observable event. The line format is the test suite's primary
/// observable and is fixed: "%.6f kind id device bytes".
struct TraceRecord {
  double time = 0.0;
  std::string kind;
  std::string id;
  std::string device;
  std::uint64_t bytes = 0;

  std::string to_line() const;
};

class TraceLog {
 public:
  void emit(double time, std::string kind, std::string id, std::string device,
            std::uint64_t bytes);
  const std::vector<TraceRecord>& records() const { return records_; }
  void clear() { records_.clear(); }

  /// All records joined as lines; byte-identical across identical runs.
  std::string to_text() const;

 private:
  std::vector<TraceRecord> records_;
};

}  // namespace rt

#endif  // RT_TRACE_HPP
