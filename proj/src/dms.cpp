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

#include "rt/dms.hpp"

#include <algorithm>

namespace rt {

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

void DmsConfig::validate() const {
  hilbert.validate();
  if (grid_origin.size() != std::size_t(hilbert.dims) ||
      cell_extent.size() != std::size_t(hilbert.dims)) {
    throw ConfigError("dms grid origin/extent rank must match hilbert dims");
  }
  for (auto e : cell_extent) {
    if (e <= 0) throw ConfigError("dms cell extents must be positive");
  }
  if (shard_count < 1) throw ConfigError("dms shard_count must be >= 1");
  if (occupied.empty()) {
    throw ConfigError("dms needs at least one occupied box");
  }
}

DmsRouting::DmsRouting(DmsConfig config) : config_(std::move(config)) {
  config_.validate();
  vmap_ = sfc::build_virtual_map(config_.occupied, config_.hilbert);
  table_ = sfc::ShardTable(vmap_.total(), config_.shard_count);
}

BoundingBox DmsRouting::element_box_to_cells(const BoundingBox& box) const {
  if (box.empty() || box.dims() != config_.hilbert.dims) {
    throw RangeError("box rank does not match the dms grid");
  }
  const auto side = std::int64_t(config_.hilbert.grid_side());
  std::vector<std::int64_t> lo(std::size_t(box.dims()), 0);
  std::vector<std::int64_t> hi(std::size_t(box.dims()), 0);
  for (int a = 0; a < box.dims(); ++a) {
    const auto sa = std::size_t(a);
    lo[sa] = floor_div(box.lo(a) - config_.grid_origin[sa],
                       config_.cell_extent[sa]);
    hi[sa] = floor_div(box.hi(a) - config_.grid_origin[sa],
                       config_.cell_extent[sa]);
    if (lo[sa] < 0 || hi[sa] >= side) {
      throw RangeError("box escapes the dms cell grid: " + box.to_string());
    }
  }
  return BoundingBox(box.dims(), lo.data(), hi.data());
}

std::vector<sfc::SfcInterval> DmsRouting::occupied_intervals(
    const BoundingBox& element_box) const {
  const BoundingBox cells = element_box_to_cells(element_box);
  auto intervals = sfc::bbox_to_intervals(cells, config_.hilbert);
  for (const auto& iv : intervals) {
    for (std::uint64_t raw = iv.start; raw <= iv.end; ++raw) {
      vmap_.to_virtual(raw);  // throws NotOccupiedError on gap cells
    }
  }
  return intervals;
}

std::set<int> DmsRouting::owners_of_intervals(
    const std::vector<sfc::SfcInterval>& intervals) const {
  std::set<int> owners;
  for (const auto& iv : intervals) {
    for (std::uint64_t raw = iv.start; raw <= iv.end; ++raw) {
      owners.insert(table_.owner_of_virtual(vmap_.to_virtual(raw)));
    }
  }
  return owners;
}

void DmsRouting::check_cell_coverage(
    const BoundingBox& query,
    const std::vector<BoundingBox>& entry_boxes) const {
  const BoundingBox cell_box = element_box_to_cells(query);
  std::vector<bool> covered(std::size_t(cell_box.volume()), false);
  for (const auto& box : entry_boxes) {
    const BoundingBox chunk_cells = element_box_to_cells(box);
    auto ov = bbox_intersect(chunk_cells, cell_box);
    if (!ov) continue;
    // Mark the odometer walk of the overlap.
    std::vector<std::int64_t> pt(std::size_t(ov->dims()), 0);
    for (int a = 0; a < ov->dims(); ++a) pt[std::size_t(a)] = ov->lo(a);
    while (true) {
      std::uint64_t off = 0;
      for (int a = 0; a < cell_box.dims(); ++a) {
        off = off * std::uint64_t(cell_box.extent(a)) +
              std::uint64_t(pt[std::size_t(a)] - cell_box.lo(a));
      }
      covered[off] = true;
      int a = ov->dims() - 1;
      for (; a >= 0; --a) {
        if (++pt[std::size_t(a)] <= ov->hi(a)) break;
        pt[std::size_t(a)] = ov->lo(a);
      }
      if (a < 0) break;
    }
  }
  if (std::find(covered.begin(), covered.end(), false) != covered.end()) {
    throw NotFoundError("query cell without metadata over " +
                        query.to_string());
  }
}

DmsStore::DmsStore(std::string name, DmsConfig config,
                   std::shared_ptr<SequenceCounter> sequence,
                   const Clock* clock, TraceLog* trace)
    : name_(std::move(name)),
      routing_(std::move(config)),
      sequence_(std::move(sequence)),
      clock_(clock),
      trace_(trace) {
  if (!sequence_) throw ConfigError("dms requires a sequence counter");
  const int count = routing_.config().shard_count;
  shards_.resize(std::size_t(count));
  for (int s = 0; s < count; ++s) {
    shards_[std::size_t(s)].shard_id = s;
  }
}

void DmsStore::emit(const std::string& kind, const std::string& id,
                    const std::string& device, std::uint64_t bytes) {
  if (trace_) trace_->emit(now(), kind, id, device, bytes);
}

Completion DmsStore::stage_region(const DataRegion& region, int origin_node) {
  const int count = routing_.config().shard_count;
  const int home = ((origin_node % count) + count) % count;
  return stage_on_shard(region, home);
}

Completion DmsStore::stage_on_shard(const DataRegion& region, int home_shard) {
  if (home_shard < 0 || home_shard >= routing_.config().shard_count) {
    throw RangeError("home shard out of range");
  }
  if (!region.materialized()) {
    throw NotFoundError("cannot stage a region without payload: " +
                        region.id().to_string());
  }
  std::uint64_t staged_bytes = 0;
  for (const auto& [box, chunk] : region.chunks()) {
    // Every cell must be registered in the virtual domain before any state
    // changes; also collect the owning shards per interval.
    const auto intervals = routing_.occupied_intervals(box);
    std::vector<std::set<int>> owners_per_interval;
    owners_per_interval.reserve(intervals.size());
    for (const auto& iv : intervals) {
      owners_per_interval.push_back(routing_.owners_of_intervals({iv}));
    }

    const std::uint64_t seq = ++(*sequence_);
    const auto key = std::make_pair(region.id(), box);
    auto& stored = shards_[std::size_t(home_shard)].data_store[key];
    stored.payload = chunk.payload;
    stored.kind = region.kind();
    stored.element_kind = region.element_kind();
    stored.seq = seq;

    DmsMetaValue meta{region.kind(), region.element_kind(), home_shard, seq};
    for (std::size_t i = 0; i < intervals.size(); ++i) {
      for (int owner : owners_per_interval[i]) {
        shards_[std::size_t(owner)].metadata_index[intervals[i]][key] = meta;
      }
    }
    staged_bytes += chunk.payload.size();
  }

  emit("dms_stage", region.id().to_string(),
       "shard" + std::to_string(home_shard), staged_bytes);
  const double bw = routing_.config().stage_bandwidth;
  const double cost = bw > 0 ? double(staged_bytes) / bw : 0.0;
  return Completion::ready(now() + cost);
}

DataRegion DmsStore::read_region(const DataRegionId& id,
                                 const BoundingBox& query) {
  return read_region_at(id, query).region;
}

ReadResult DmsStore::read_region_at(const DataRegionId& id,
                                    const BoundingBox& query) {
  std::vector<sfc::SfcInterval> query_intervals;
  try {
    query_intervals = routing_.occupied_intervals(query);
  } catch (const NotOccupiedError& e) {
    // A gap cell cannot carry metadata, so the query is unanswerable.
    throw NotFoundError(std::string("query touches unstaged cells: ") +
                        e.what());
  }

  // Gather matching chunk descriptors from every interval-owning shard.
  std::map<BoundingBox, DmsMetaValue> entries;
  for (const auto& qiv : query_intervals) {
    for (int owner : routing_.owners_of_intervals({qiv})) {
      const auto& index = shards_[std::size_t(owner)].metadata_index;
      for (const auto& [iv, chunk_map] : index) {
        if (iv.end < qiv.start || iv.start > qiv.end) continue;
        for (const auto& [key, meta] : chunk_map) {
          if (!(key.first == id)) continue;
          if (!key.second.intersects(query)) continue;
          auto [it, inserted] = entries.try_emplace(key.second, meta);
          if (!inserted && it->second.seq < meta.seq) it->second = meta;
        }
      }
    }
  }
  if (entries.empty()) {
    throw NotFoundError("no staged data for " + id.to_string() + " over " +
                        query.to_string());
  }

  // Every queried cell needs at least one descriptor covering it.
  std::vector<BoundingBox> entry_boxes;
  entry_boxes.reserve(entries.size());
  for (const auto& [box, meta] : entries) entry_boxes.push_back(box);
  routing_.check_cell_coverage(query, entry_boxes);

  // Fetch payloads from their home shards and replay in sequence order.
  std::vector<AssemblePiece> pieces;
  for (const auto& [box, meta] : entries) {
    const auto& home = shards_[std::size_t(meta.home_shard)];
    auto it = home.data_store.find(std::make_pair(id, box));
    if (it == home.data_store.end()) {
      throw NotFoundError("metadata without payload for " + id.to_string());
    }
    pieces.push_back(AssemblePiece{box, it->second.seq, it->second.kind,
                                   it->second.element_kind,
                                   it->second.payload});
  }
  AssembledRead assembled = assemble_read(id, query, std::move(pieces));
  emit("dms_read", id.to_string(), "-", assembled.moved_bytes);
  const double bw = routing_.config().read_bandwidth;
  const double cost = bw > 0 ? double(assembled.moved_bytes) / bw : 0.0;
  return ReadResult{std::move(assembled.region), now() + cost};
}

Completion DmsStore::delete_region(const DataRegionId& id) {
  for (auto& shard : shards_) {
    std::erase_if(shard.data_store,
                  [&](const auto& kv) { return kv.first.first == id; });
    for (auto& [iv, chunk_map] : shard.metadata_index) {
      std::erase_if(chunk_map,
                    [&](const auto& kv) { return kv.first.first == id; });
    }
    std::erase_if(shard.metadata_index,
                  [](const auto& kv) { return kv.second.empty(); });
  }
  emit("dms_delete", id.to_string(), "-", 0);
  return Completion::ready(now());
}

std::set<int> DmsStore::payload_shards(const DataRegionId& id) const {
  std::set<int> out;
  for (const auto& shard : shards_) {
    for (const auto& [key, chunk] : shard.data_store) {
      if (key.first == id) {
        out.insert(shard.shard_id);
        break;
      }
    }
  }
  return out;
}

std::set<int> DmsStore::metadata_shards(const DataRegionId& id) const {
  std::set<int> out;
  for (const auto& shard : shards_) {
    for (const auto& [iv, chunk_map] : shard.metadata_index) {
      for (const auto& [key, meta] : chunk_map) {
        if (key.first == id) {
          out.insert(shard.shard_id);
          break;
        }
      }
    }
  }
  return out;
}

StorageBackend& StorageRegistry::at(const std::string& name) {
  auto it = backends_.find(name);
  if (it == backends_.end()) {
    throw ConfigError("no storage backend named '" + name + "'");
  }
  return *it->second;
}

}  // namespace rt
