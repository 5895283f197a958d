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

#ifndef RT_DATAFLOW_HPP
#define RT_DATAFLOW_HPP

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rt/region_template.hpp"
#include "rt/storage.hpp"
#include "rt/wrm.hpp"

namespace rt {

/// What a stage reads or writes: the region tuple, the element-space window,
/// the direction, and the backend holding it.
struct RegionDescriptor {
  DataRegionId id;
  BoundingBox query;
  IoMode io_mode = IoMode::kInput;
  std::string storage_binding;
  bool lazy = false;
};

/// Coarse-grain unit the manager dispatches to workers. The body expands
/// into the fine-grain task graph on the worker.
struct StageInstance {
  std::uint64_t stage_id = 0;
  std::string stage_kind;
  std::vector<RegionDescriptor> region_descriptors;
  std::set<std::uint64_t> deps;
  std::function<std::vector<TaskNode>()> body;
};

/// Manager-side stage graph: demand-driven dispatch with FIFO tie-break,
/// incremental growth (completing stages may spawn new ones).
class ManagerState {
 public:
  /// Throws ProtocolError on a duplicate stage id. Dependencies may name
  /// stages added later; they stay unsatisfied until that stage completes.
  void add_stage(StageInstance stage);

  /// First dep-satisfied unassigned stage in insertion order, marked
  /// assigned to `worker`; nullopt when none is eligible.
  std::optional<std::uint64_t> dispatch(int worker);

  /// Marks an assigned stage done, ingests stages it spawned, and returns the
  /// ids whose dependency sets just became satisfied (insertion order).
  /// Throws ProtocolError for unknown, unassigned, or already-done stages.
  std::vector<std::uint64_t> stage_complete(
      std::uint64_t stage_id, std::vector<StageInstance> spawned = {});

  const StageInstance& stage(std::uint64_t id) const;
  std::size_t size() const { return stages_.size(); }
  std::size_t done_count() const { return completion_log_.size(); }
  bool all_done() const { return done_count() == size(); }
  /// True when progress is impossible: nothing done or dispatchable remains.
  bool stuck() const;
  std::vector<std::uint64_t> eligible_ids() const;
  std::optional<int> assigned_worker(std::uint64_t id) const;
  const std::vector<std::uint64_t>& completion_log() const {
    return completion_log_;
  }

 private:
  struct StageEntry {
    StageInstance stage;
    bool assigned = false;
    bool done = false;
    std::optional<int> worker;
  };

  const StageEntry& entry(std::uint64_t id) const;
  bool eligible(const StageEntry& e) const;

  std::map<std::uint64_t, StageEntry> stages_;
  std::vector<std::uint64_t> order_;
  std::vector<std::uint64_t> completion_log_;
};

/// Materializes a stage's inputs from storage into a fresh local template:
/// non-lazy inputs are read (NotFoundError propagates as stage failure),
/// lazy inputs are installed metadata-only, outputs are created empty.
RegionTemplate worker_prepare(const StageInstance& stage,
                              StorageRegistry& storage);

/// Read-on-touch for lazy regions: the first access fetches payload from the
/// region's bound backend; later touches are no-ops. Returns the region.
DataRegion& touch_region(RegionTemplate& local, const DataRegionId& id,
                         StorageRegistry& storage);

/// Stages materialized Output/InputOutput regions to their bound backends and
/// drops input-only regions from the local template. Returns the stage
/// completions in descriptor order.
std::vector<Completion> stage_finalize(RegionTemplate& local,
                                       const StageInstance& stage,
                                       StorageRegistry& storage,
                                       int origin_node);

}  // namespace rt

#endif  // RT_DATAFLOW_HPP
