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

#ifndef RT_REGION_TEMPLATE_HPP
#define RT_REGION_TEMPLATE_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rt/data_region.hpp"

namespace rt {

/// Named container of data regions that all refer to the same spatial
/// neighborhood. Its bounding box is maintained as the minimal box enclosing
/// every inserted region; with no regions it is the empty sentinel.
class RegionTemplate {
 public:
  RegionTemplate() = default;
  explicit RegionTemplate(std::string name) : name_(std::move(name)) {}

  const std::string& name() const { return name_; }
  const BoundingBox& bbox() const { return bbox_; }
  std::size_t size() const { return regions_.size(); }
  bool empty() const { return regions_.empty(); }

  /// Inserts a region; the full tuple id must be unique within the template.
  /// Throws DuplicateRegionError otherwise.
  DataRegion& insert_data_region(DataRegion region);

  /// Exact tuple lookup.
  const DataRegion* get_data_region(const DataRegionId& id) const;
  DataRegion* get_data_region(const DataRegionId& id);

  /// Newest (timestamp, version) region stored under ns::key with the given
  /// type tag, or nullptr.
  const DataRegion* get_newest(const std::string& ns, const std::string& key,
                               const std::string& type_tag) const;

  /// All regions stored under ns::key, any type/timestamp/version.
  std::vector<const DataRegion*> find_by_name(const std::string& ns,
                                              const std::string& key) const;

  /// Removes a region by exact tuple; the template box shrinks back to the
  /// union of the remaining regions. Returns false when absent.
  bool remove_data_region(const DataRegionId& id);

  const std::map<DataRegionId, DataRegion>& regions() const {
    return regions_;
  }

  bool operator==(const RegionTemplate& other) const {
    return name_ == other.name_ && bbox_ == other.bbox_ &&
           regions_ == other.regions_;
  }

 private:
  std::string name_;
  BoundingBox bbox_;
  std::map<DataRegionId, DataRegion> regions_;
};

}  // namespace rt

#endif  // RT_REGION_TEMPLATE_HPP
