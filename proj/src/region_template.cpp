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

#include "rt/region_template.hpp"

namespace rt {

DataRegion& RegionTemplate::insert_data_region(DataRegion region) {
  auto [it, inserted] = regions_.try_emplace(region.id(), std::move(region));
  if (!inserted) {
    throw DuplicateRegionError("data region tuple already present: " +
                               it->first.to_string());
  }
  if (!it->second.bbox().empty()) {
    bbox_ = bbox_union(bbox_, it->second.bbox());
  }
  return it->second;
}

const DataRegion* RegionTemplate::get_data_region(
    const DataRegionId& id) const {
  auto it = regions_.find(id);
  return it == regions_.end() ? nullptr : &it->second;
}

DataRegion* RegionTemplate::get_data_region(const DataRegionId& id) {
  auto it = regions_.find(id);
  return it == regions_.end() ? nullptr : &it->second;
}

const DataRegion* RegionTemplate::get_newest(const std::string& ns,
                                             const std::string& key,
                                             const std::string& type_tag)
    const {
  const DataRegion* best = nullptr;
  for (const auto& [id, region] : regions_) {
    if (id.ns != ns || id.key != key || id.type_tag != type_tag) continue;
    if (best == nullptr ||
        std::tie(best->id().timestamp, best->id().version) <
            std::tie(id.timestamp, id.version)) {
      best = &region;
    }
  }
  return best;
}

std::vector<const DataRegion*> RegionTemplate::find_by_name(
    const std::string& ns, const std::string& key) const {
  std::vector<const DataRegion*> out;
  for (const auto& [id, region] : regions_) {
    if (id.ns == ns && id.key == key) out.push_back(&region);
  }
  return out;
}

bool RegionTemplate::remove_data_region(const DataRegionId& id) {
  if (regions_.erase(id) == 0) return false;
  bbox_ = BoundingBox();
  for (const auto& [rid, region] : regions_) {
    if (!region.bbox().empty()) bbox_ = bbox_union(bbox_, region.bbox());
  }
  return true;
}

}  // namespace rt
