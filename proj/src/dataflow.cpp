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

#include "rt/dataflow.hpp"

#include <algorithm>

namespace rt {

void ManagerState::add_stage(StageInstance stage) {
  const std::uint64_t id = stage.stage_id;
  StageEntry entry;
  entry.stage = std::move(stage);
  if (!stages_.emplace(id, std::move(entry)).second) {
    throw ProtocolError("duplicate stage id " + std::to_string(id));
  }
  order_.push_back(id);
}

const ManagerState::StageEntry& ManagerState::entry(std::uint64_t id) const {
  auto it = stages_.find(id);
  if (it == stages_.end()) {
    throw ProtocolError("unknown stage id " + std::to_string(id));
  }
  return it->second;
}

const StageInstance& ManagerState::stage(std::uint64_t id) const {
  return entry(id).stage;
}

bool ManagerState::eligible(const StageEntry& e) const {
  if (e.assigned || e.done) return false;
  return std::all_of(e.stage.deps.begin(), e.stage.deps.end(),
                     [&](std::uint64_t dep) {
                       auto it = stages_.find(dep);
                       return it != stages_.end() && it->second.done;
                     });
}

std::vector<std::uint64_t> ManagerState::eligible_ids() const {
  std::vector<std::uint64_t> out;
  for (std::uint64_t id : order_) {
    if (eligible(stages_.at(id))) out.push_back(id);
  }
  return out;
}

std::optional<int> ManagerState::assigned_worker(std::uint64_t id) const {
  return entry(id).worker;
}

bool ManagerState::stuck() const {
  if (all_done()) return false;
  const bool any_assigned =
      std::any_of(stages_.begin(), stages_.end(), [](const auto& kv) {
        return kv.second.assigned && !kv.second.done;
      });
  return !any_assigned && eligible_ids().empty();
}

std::optional<std::uint64_t> ManagerState::dispatch(int worker) {
  for (std::uint64_t id : order_) {
    StageEntry& e = stages_.at(id);
    if (!eligible(e)) continue;
    e.assigned = true;
    e.worker = worker;
    return id;
  }
  return std::nullopt;
}

std::vector<std::uint64_t> ManagerState::stage_complete(
    std::uint64_t stage_id, std::vector<StageInstance> spawned) {
  auto it = stages_.find(stage_id);
  if (it == stages_.end()) {
    throw ProtocolError("completing unknown stage " +
                        std::to_string(stage_id));
  }
  if (!it->second.assigned) {
    throw ProtocolError("completing a stage that was never dispatched: " +
                        std::to_string(stage_id));
  }
  if (it->second.done) {
    throw ProtocolError("stage completed twice: " + std::to_string(stage_id));
  }

  const std::vector<std::uint64_t> before = eligible_ids();
  it->second.done = true;
  completion_log_.push_back(stage_id);
  for (auto& child : spawned) add_stage(std::move(child));

  std::vector<std::uint64_t> newly;
  for (std::uint64_t id : eligible_ids()) {
    if (std::find(before.begin(), before.end(), id) == before.end()) {
      newly.push_back(id);
    }
  }
  return newly;
}

RegionTemplate worker_prepare(const StageInstance& stage,
                              StorageRegistry& storage) {
  RegionTemplate local(stage.stage_kind + "#" +
                       std::to_string(stage.stage_id));
  for (const auto& d : stage.region_descriptors) {
    if (d.io_mode != IoMode::kOutput && !d.lazy) {
      DataRegion region = storage.at(d.storage_binding)
                              .read_region(d.id, d.query);
      region.set_io_mode(d.io_mode);
      region.set_storage_binding(d.storage_binding);
      local.insert_data_region(std::move(region));
      continue;
    }
    // Lazy inputs and outputs carry shape only; payload kind/element default
    // until data exists (first touch, or the stage body writing the output).
    DataRegion region(d.id, RegionKind::kDense2D, ElementKind::kU8, d.query);
    region.set_io_mode(d.io_mode);
    region.set_storage_binding(d.storage_binding);
    region.set_lazy(d.lazy && d.io_mode != IoMode::kOutput);
    local.insert_data_region(std::move(region));
  }
  return local;
}

DataRegion& touch_region(RegionTemplate& local, const DataRegionId& id,
                         StorageRegistry& storage) {
  DataRegion* region = local.get_data_region(id);
  if (region == nullptr) {
    throw NotFoundError("touching a region absent from the local template: " +
                        id.to_string());
  }
  if (!region->lazy() || region->materialized()) return *region;
  DataRegion fetched =
      storage.at(region->storage_binding()).read_region(id, region->bbox());
  const IoMode mode = region->io_mode();
  const std::string binding = region->storage_binding();
  fetched.set_io_mode(mode);
  fetched.set_storage_binding(binding);
  fetched.set_lazy(true);
  local.remove_data_region(id);
  return local.insert_data_region(std::move(fetched));
}

std::vector<Completion> stage_finalize(RegionTemplate& local,
                                       const StageInstance& stage,
                                       StorageRegistry& storage,
                                       int origin_node) {
  std::vector<Completion> completions;
  for (const auto& d : stage.region_descriptors) {
    const DataRegion* region = local.get_data_region(d.id);
    if (region == nullptr) continue;
    if (d.io_mode == IoMode::kInput) {
      local.remove_data_region(d.id);
      continue;
    }
    // Output / InputOutput: persist whatever the stage produced. A region the
    // body never materialized has nothing to stage.
    if (region->materialized()) {
      completions.push_back(storage.at(d.storage_binding)
                                .stage_region(*region, origin_node));
    }
  }
  return completions;
}

}  // namespace rt
