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

#include "rt/disk_store.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace rt {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(char(v >> (8 * i)));
}
void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(char(v >> (8 * i)));
}
void put_i64(std::string& out, std::int64_t v) { put_u64(out, std::uint64_t(v)); }
void put_str(std::string& out, const std::string& s) {
  put_u32(out, std::uint32_t(s.size()));
  out += s;
}
void put_bbox(std::string& out, const BoundingBox& b) {
  out.push_back(char(b.dims()));
  for (int a = 0; a < b.dims(); ++a) put_i64(out, b.lo(a));
  for (int a = 0; a < b.dims(); ++a) put_i64(out, b.hi(a));
}

class FileReader {
 public:
  explicit FileReader(const std::string& path) : in_(path, std::ios::binary) {
    if (!in_) throw IoError("cannot open session file: " + path);
    in_.seekg(0, std::ios::end);
    size_ = std::uint64_t(in_.tellg());
    in_.seekg(0);
  }

  std::uint64_t size() const { return size_; }
  std::uint64_t pos() { return std::uint64_t(in_.tellg()); }
  void seek(std::uint64_t off) {
    if (off > size_) throw DecodeError("session file offset out of range");
    in_.clear();
    in_.seekg(std::streamoff(off));
  }

  std::uint8_t u8() {
    char c;
    if (!in_.get(c)) throw DecodeError("session file truncated");
    return std::uint8_t(c);
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(u8()) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(u8()) << (8 * i);
    return v;
  }
  std::int64_t i64() { return std::int64_t(u64()); }
  std::string str() {
    const std::uint32_t len = u32();
    if (len > size_) throw DecodeError("session file string overruns");
    std::string s(len, '\0');
    if (len && !in_.read(s.data(), std::streamsize(len))) {
      throw DecodeError("session file truncated");
    }
    return s;
  }
  std::vector<std::uint8_t> bytes(std::uint64_t len) {
    if (len > size_) throw DecodeError("session file payload overruns");
    std::vector<std::uint8_t> b(len);
    if (len &&
        !in_.read(reinterpret_cast<char*>(b.data()), std::streamsize(len))) {
      throw DecodeError("session file truncated");
    }
    return b;
  }
  BoundingBox bbox() {
    const int dims = u8();
    if (dims == 0) return BoundingBox();
    if (dims > BoundingBox::kMaxDims) {
      throw DecodeError("session file box rank out of range");
    }
    std::vector<std::int64_t> lo(std::size_t(dims), 0);
    std::vector<std::int64_t> hi(std::size_t(dims), 0);
    for (int a = 0; a < dims; ++a) lo[std::size_t(a)] = i64();
    for (int a = 0; a < dims; ++a) hi[std::size_t(a)] = i64();
    return BoundingBox(dims, lo.data(), hi.data());
  }

 private:
  std::ifstream in_;
  std::uint64_t size_ = 0;
};

DiskRecord read_record(FileReader& in) {
  DiskRecord rec;
  rec.id.ns = in.str();
  rec.id.key = in.str();
  rec.id.type_tag = in.str();
  rec.id.timestamp = in.i64();
  rec.id.version = in.i64();
  const std::uint8_t kind = in.u8();
  const std::uint8_t elem = in.u8();
  if (kind > 4 || elem > 4) throw DecodeError("session record bad enum");
  rec.kind = RegionKind(kind);
  rec.element_kind = ElementKind(elem);
  rec.box = in.bbox();
  rec.seq = in.u64();
  rec.payload = in.bytes(in.u64());
  return rec;
}

}  // namespace

void IoGroupConfig::validate() const {
  if (io_node_count < 1) throw ConfigError("io_node_count must be >= 1");
  if (queue_threshold < 1) throw ConfigError("queue_threshold must be >= 1");
  if (group_size < 0) throw ConfigError("group_size must be >= 0");
  if (group_size > 0 && io_node_count % group_size != 0) {
    throw ConfigError("group_size must divide the I/O node count");
  }
  if (directory.empty()) throw ConfigError("disk store needs a directory");
}

int IoGroupConfig::group_count() const {
  return group_size == 0 ? 1 : io_node_count / group_size;
}

int IoGroupConfig::group_of(int node) const {
  return group_size == 0 ? 0 : node / group_size;
}

std::vector<std::uint64_t> write_session_file(
    const std::string& path, std::uint64_t session_seq,
    const std::vector<DiskRecord>& records) {
  std::string out;
  put_u32(out, kSessionMagic);
  put_u64(out, session_seq);
  put_u32(out, std::uint32_t(records.size()));
  std::vector<std::uint64_t> offsets;
  offsets.reserve(records.size());
  for (const auto& rec : records) {
    offsets.push_back(out.size());
    put_str(out, rec.id.ns);
    put_str(out, rec.id.key);
    put_str(out, rec.id.type_tag);
    put_i64(out, rec.id.timestamp);
    put_i64(out, rec.id.version);
    out.push_back(char(rec.kind));
    out.push_back(char(rec.element_kind));
    put_bbox(out, rec.box);
    put_u64(out, rec.seq);
    put_u64(out, rec.payload.size());
    out.append(reinterpret_cast<const char*>(rec.payload.data()),
               rec.payload.size());
  }
  const std::uint64_t footer_offset = out.size();
  for (auto off : offsets) put_u64(out, off);
  put_u64(out, footer_offset);
  put_u32(out, kSessionEndMagic);

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file || !file.write(out.data(), std::streamsize(out.size()))) {
    throw IoError("cannot write session file: " + path);
  }
  return offsets;
}

std::vector<DiskRecord> read_session_file(const std::string& path) {
  FileReader in(path);
  if (in.size() < 4 + 8 + 4 + 8 + 4) {
    throw DecodeError("session file too short: " + path);
  }
  if (in.u32() != kSessionMagic) throw DecodeError("session file bad magic");
  in.u64();  // session seq
  const std::uint32_t count = in.u32();

  in.seek(in.size() - 12);
  const std::uint64_t footer_offset = in.u64();
  if (in.u32() != kSessionEndMagic) {
    throw DecodeError("session file bad end magic");
  }
  in.seek(footer_offset);
  std::vector<std::uint64_t> offsets(count);
  for (auto& off : offsets) off = in.u64();

  std::vector<DiskRecord> records;
  records.reserve(count);
  for (auto off : offsets) {
    in.seek(off);
    records.push_back(read_record(in));
  }
  return records;
}

DiskRecord read_record_at(const std::string& path, std::uint64_t offset) {
  FileReader in(path);
  in.seek(offset);
  return read_record(in);
}

DiskStore::DiskStore(std::string name, IoGroupConfig config,
                     std::shared_ptr<SequenceCounter> sequence,
                     const Clock* clock, TraceLog* trace)
    : name_(std::move(name)),
      config_(std::move(config)),
      sequence_(std::move(sequence)),
      clock_(clock),
      trace_(trace),
      rng_(config_.random_seed) {
  config_.validate();
  if (!sequence_) throw ConfigError("disk store requires a sequence counter");
  std::error_code ec;
  std::filesystem::create_directories(config_.directory, ec);
  if (ec || !std::filesystem::is_directory(config_.directory)) {
    throw IoError("cannot create disk store directory: " + config_.directory);
  }
  queues_.resize(std::size_t(config_.io_node_count));
  group_busy_until_.assign(std::size_t(config_.group_count()), 0.0);
}

void DiskStore::emit(const std::string& kind, const std::string& id,
                     const std::string& device, std::uint64_t bytes) {
  if (trace_) trace_->emit(now(), kind, id, device, bytes);
}

int DiskStore::pick_node(int origin_node) {
  if (config_.placement == IoPlacement::kCoLocated) {
    const int n = config_.io_node_count;
    return ((origin_node % n) + n) % n;
  }
  if (config_.distribution == IoDistribution::kRoundRobin) {
    return int(rr_counter_++ % std::uint64_t(config_.io_node_count));
  }
  return int(rng_() % std::uint64_t(config_.io_node_count));
}

int DiskStore::queued_buffers(int node) const {
  return int(queues_.at(std::size_t(node)).size());
}

double DiskStore::run_session(int group, double at) {
  const int gsize =
      config_.group_size == 0 ? config_.io_node_count : config_.group_size;
  const int first = group * gsize;

  WriteSession session;
  session.group_id = group;
  session.session_seq = next_session_seq_++;
  session.start = at;

  std::vector<DiskRecord> records;
  std::uint64_t total_bytes = 0;
  for (int n = first; n < first + gsize; ++n) {
    auto& queue = queues_[std::size_t(n)];
    while (!queue.empty()) {
      DiskRecord rec = std::move(queue.front());
      queue.pop_front();
      total_bytes += rec.payload.size();
      session.flushed.push_back(WriteSession::Flushed{
          n, rec.id, rec.box, std::uint64_t(rec.payload.size())});
      records.push_back(std::move(rec));
    }
  }

  char fname[64];
  std::snprintf(fname, sizeof fname, "session_%08llu.rts",
                static_cast<unsigned long long>(session.session_seq));
  session.file =
      (std::filesystem::path(config_.directory) / fname).string();
  const auto offsets = write_session_file(session.file, session.session_seq,
                                          records);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const DiskRecord& rec = records[i];
    index_[rec.id].push_back(IndexEntry{rec.box, rec.seq, rec.kind,
                                        rec.element_kind, session.file,
                                        offsets[i]});
  }

  session.duration = config_.session_overhead +
                     (config_.disk_bandwidth > 0
                          ? double(total_bytes) / config_.disk_bandwidth
                          : 0.0);
  group_busy_until_[std::size_t(group)] = at + session.duration;

  emit("disk_session_start", "s" + std::to_string(session.session_seq),
       "group" + std::to_string(group), total_bytes);
  if (trace_) {
    trace_->emit(at + session.duration, "disk_session_end",
                 "s" + std::to_string(session.session_seq),
                 "group" + std::to_string(group), total_bytes);
  }
  sessions_.push_back(std::move(session));
  return at + sessions_.back().duration;
}

Completion DiskStore::stage_region(const DataRegion& region, int origin_node) {
  if (!region.materialized()) {
    throw NotFoundError("cannot stage a region without payload: " +
                        region.id().to_string());
  }
  const int node = pick_node(origin_node);
  const int group = config_.group_of(node);

  const double requested = now();
  const double effective =
      std::max(requested, group_busy_until_[std::size_t(group)]);
  enqueue_log_.push_back(EnqueueInfo{node, group, requested, effective});

  std::uint64_t staged_bytes = 0;
  for (const auto& [box, chunk] : region.chunks()) {
    DiskRecord rec;
    rec.id = region.id();
    rec.kind = region.kind();
    rec.element_kind = region.element_kind();
    rec.box = box;
    rec.seq = ++(*sequence_);
    rec.payload = chunk.payload;
    staged_bytes += rec.payload.size();
    queues_[std::size_t(node)].push_back(std::move(rec));
  }
  emit("disk_enqueue", region.id().to_string(), "io" + std::to_string(node),
       staged_bytes);

  double ready = effective;
  if (int(queues_[std::size_t(node)].size()) >= config_.queue_threshold) {
    // The whole group enters a write session; members block through it.
    ready = run_session(group, effective);
  }
  return Completion::ready(ready);
}

void DiskStore::flush_all() {
  for (int g = 0; g < config_.group_count(); ++g) {
    const int gsize =
        config_.group_size == 0 ? config_.io_node_count : config_.group_size;
    bool pending = false;
    for (int n = g * gsize; n < (g + 1) * gsize; ++n) {
      if (!queues_[std::size_t(n)].empty()) {
        pending = true;
        break;
      }
    }
    if (pending) {
      run_session(g, std::max(now(), group_busy_until_[std::size_t(g)]));
    }
  }
}

DataRegion DiskStore::read_region(const DataRegionId& id,
                                  const BoundingBox& query) {
  return read_region_at(id, query).region;
}

DiskStore::TimedRead DiskStore::read_region_at(const DataRegionId& id,
                                               const BoundingBox& query) {
  flush_all();  // read barrier
  double barrier = now();
  for (double t : group_busy_until_) barrier = std::max(barrier, t);

  auto it = index_.find(id);
  if (it == index_.end()) {
    throw NotFoundError("no staged data for " + id.to_string());
  }
  std::vector<AssemblePiece> pieces;
  for (const auto& entry : it->second) {
    if (!entry.box.intersects(query)) continue;
    DiskRecord rec = read_record_at(entry.file, entry.offset);
    if (!(rec.id == id) || !(rec.box == entry.box) || rec.seq != entry.seq) {
      throw DecodeError("session file record does not match the index");
    }
    pieces.push_back(AssemblePiece{rec.box, rec.seq, rec.kind,
                                   rec.element_kind, std::move(rec.payload)});
  }
  AssembledRead assembled = assemble_read(id, query, std::move(pieces));
  emit("disk_read", id.to_string(), "-", assembled.moved_bytes);
  const double cost =
      config_.disk_bandwidth > 0
          ? double(assembled.moved_bytes) / config_.disk_bandwidth
          : 0.0;
  return TimedRead{std::move(assembled.region), barrier + cost};
}

Completion DiskStore::delete_region(const DataRegionId& id) {
  index_.erase(id);
  for (auto& queue : queues_) {
    std::erase_if(queue, [&](const DiskRecord& r) { return r.id == id; });
  }
  emit("disk_delete", id.to_string(), "-", 0);
  return Completion::ready(now());
}

}  // namespace rt
