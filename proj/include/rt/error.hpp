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

#ifndef RT_ERROR_HPP
#define RT_ERROR_HPP

#include <stdexcept>
#include <string>

namespace rt {

/// Base class for every error raised by the runtime.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Two boxes of different dimensionality were combined.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A (name, type, timestamp, version) tuple already exists in the template.
class DuplicateRegionError : public Error {
 public:
  using Error::Error;
};

/// Invalid tiling request: non-positive tile extent or box escaping the
/// source bounding box.
class PartitionError : public Error {
 public:
  using Error::Error;
};

/// Ghost-cell shrink would leave no interior.
class EmptyRoiError : public Error {
 public:
  using Error::Error;
};

/// Truncated or corrupt byte buffer.
class DecodeError : public Error {
 public:
  using Error::Error;
};

/// Coordinate or index outside the curve grid.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// SFC index falls in a gap of the virtual domain.
class NotOccupiedError : public Error {
 public:
  using Error::Error;
};

/// No staged data covers the requested identifier / query box.
class NotFoundError : public Error {
 public:
  using Error::Error;
};

/// Filesystem-level failure in the disk store.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Task or stage graph contains a dependency cycle.
class CycleError : public Error {
 public:
  using Error::Error;
};

/// Runtime protocol misuse (double completion, unknown id, ...).
class ProtocolError : public Error {
 public:
  using Error::Error;
};

/// Invalid run/sweep/workload configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace rt

#endif  // RT_ERROR_HPP
