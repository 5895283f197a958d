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

#include "rt/storage.hpp"

#include <algorithm>

namespace rt {

AssembledRead assemble_read(const DataRegionId& id, const BoundingBox& query,
                            std::vector<AssemblePiece> pieces) {
  if (pieces.empty()) {
    throw NotFoundError("no staged data for " + id.to_string() + " over " +
                        query.to_string());
  }
  std::sort(pieces.begin(), pieces.end(),
            [](const AssemblePiece& a, const AssemblePiece& b) {
              return a.seq < b.seq;
            });
  const RegionKind kind = pieces.back().kind;
  const ElementKind elem = pieces.back().element_kind;
  const std::size_t esize = element_size(elem);

  std::vector<std::uint8_t> canvas(std::size_t(query.volume()) * esize, 0);
  std::vector<std::uint8_t> mask(std::size_t(query.volume()), 0);
  std::uint64_t moved = 0;
  for (const auto& piece : pieces) {
    copy_box_overlap(canvas, query, piece.payload, piece.box, esize);
    std::vector<std::uint8_t> ones(std::size_t(piece.box.volume()), 1);
    copy_box_overlap(mask, query, ones, piece.box, 1);
    if (auto ov = bbox_intersect(piece.box, query)) {
      moved += std::uint64_t(ov->volume()) * esize;
    }
  }
  if (std::find(mask.begin(), mask.end(), 0) != mask.end()) {
    throw NotFoundError("query includes elements never written for " +
                        id.to_string());
  }

  DataRegion out(id, kind, elem, query);
  out.put_chunk(query, std::move(canvas));
  return AssembledRead{std::move(out), moved};
}

}  // namespace rt
