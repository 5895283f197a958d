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

#ifndef RT_STORAGE_HPP
#define RT_STORAGE_HPP

#include <atomic>
#include <condition_variable>
#include <exception>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "rt/data_region.hpp"

namespace rt {

/// Completion handle for an asynchronous storage operation. `ready_time`
/// carries the simulated instant the operation's effect is fully durable,
/// letting the event loop model staging latency; callers outside the
/// simulator just wait().
class Completion {
 public:
  Completion() : state_(std::make_shared<State>()) {}

  static Completion ready(double ready_time = 0.0) {
    Completion c;
    c.complete(ready_time);
    return c;
  }

  static Completion failed(std::exception_ptr error) {
    Completion c;
    c.fail(std::move(error));
    return c;
  }

  void complete(double ready_time = 0.0) {
    std::lock_guard lock(state_->mu);
    state_->done = true;
    state_->ready_time = ready_time;
    state_->cv.notify_all();
  }

  void fail(std::exception_ptr error) {
    std::lock_guard lock(state_->mu);
    state_->done = true;
    state_->error = std::move(error);
    state_->cv.notify_all();
  }

  bool done() const {
    std::lock_guard lock(state_->mu);
    return state_->done;
  }

  /// Blocks until done; rethrows a stored failure.
  void wait() const {
    std::unique_lock lock(state_->mu);
    state_->cv.wait(lock, [&] { return state_->done; });
    if (state_->error) std::rethrow_exception(state_->error);
  }

  /// Simulated time at which the effect is durable (valid once done).
  double ready_time() const {
    std::lock_guard lock(state_->mu);
    return state_->ready_time;
  }

 private:
  struct State {
    mutable std::mutex mu;
    std::condition_variable cv;
    bool done = false;
    double ready_time = 0.0;
    std::exception_ptr error;
  };
  std::shared_ptr<State> state_;
};

/// Monotonic stage sequence shared by every backend of one deployment; the
/// mechanism behind last-writer-wins across storages.
using SequenceCounter = std::atomic<std::uint64_t>;

/// Contract for global data-region staging. Visibility rule: once a stage
/// completion is observed, reads see that data; overlapping writes resolve by
/// highest stage sequence (last writer wins).
class StorageBackend {
 public:
  virtual ~StorageBackend() = default;

  virtual const std::string& name() const = 0;

  /// Stores all chunks of a materialized region. `origin_node` is the
  /// compute node performing the stage; backends use it for data placement.
  virtual Completion stage_region(const DataRegion& region,
                                  int origin_node) = 0;

  /// Materializes `query` from staged data as one assembled chunk. Throws
  /// NotFoundError when any queried element was never written.
  virtual DataRegion read_region(const DataRegionId& id,
                                 const BoundingBox& query) = 0;

  /// Idempotent; absent ids are a no-op.
  virtual Completion delete_region(const DataRegionId& id) = 0;
};

/// One staged chunk feeding a read: replayed onto the query canvas in
/// ascending sequence order (last writer wins element-wise).
struct AssemblePiece {
  BoundingBox box;
  std::uint64_t seq = 0;
  RegionKind kind = RegionKind::kDense2D;
  ElementKind element_kind = ElementKind::kU8;
  std::vector<std::uint8_t> payload;
};

struct AssembledRead {
  DataRegion region;
  /// Payload bytes that intersected the query (the transfer volume).
  std::uint64_t moved_bytes = 0;
};

/// Replays `pieces` over `query` and returns one materialized chunk. Throws
/// NotFoundError when any queried element stays unwritten.
AssembledRead assemble_read(const DataRegionId& id, const BoundingBox& query,
                            std::vector<AssemblePiece> pieces);

/// Named backends for one deployment, plus the shared stage sequence.
class StorageRegistry {
 public:
  StorageRegistry() : sequence_(std::make_shared<SequenceCounter>(0)) {}

  std::shared_ptr<SequenceCounter> sequence() { return sequence_; }

  void add(std::shared_ptr<StorageBackend> backend) {
    backends_[backend->name()] = std::move(backend);
  }

  StorageBackend* find(const std::string& name) {
    auto it = backends_.find(name);
    return it == backends_.end() ? nullptr : it->second.get();
  }

  StorageBackend& at(const std::string& name);

 private:
  std::shared_ptr<SequenceCounter> sequence_;
  std::map<std::string, std::shared_ptr<StorageBackend>> backends_;
};

}  // namespace rt

#endif  // RT_STORAGE_HPP
