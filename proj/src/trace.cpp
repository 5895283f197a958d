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

#include "rt/trace.hpp"

#include <cstdio>

namespace rt {

std::string TraceRecord::to_line() const {
  char head[64];
  std::snprintf(head, sizeof head, "%.6f", time);
  return std::string(head) + " " + kind + " " + id + " " + device + " " +
         std::to_string(bytes);
}

void TraceLog::emit(double time, std::string kind, std::string id,
                    std::string device, std::uint64_t bytes) {
  records_.push_back(TraceRecord{time, std::move(kind), std::move(id),
                                 std::move(device), bytes});
}

std::string TraceLog::to_text() const {
  std::string out;
  for (const auto& r : records_) {
    out += r.to_line();
    out += '\n';
  }
  return out;
}

}  // namespace rt
