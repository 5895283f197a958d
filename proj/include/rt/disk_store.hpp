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

#ifndef RT_DISK_STORE_HPP
#define RT_DISK_STORE_HPP

#include <deque>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "rt/storage.hpp"
#include "rt/trace.hpp"

namespace rt {

enum class IoPlacement : std::uint8_t {
  kCoLocated = 0,  // compute nodes run their own I/O queues
  kSeparated = 1,  // dedicated I/O nodes picked by a distribution policy
};

enum class IoDistribution : std::uint8_t {
  kRoundRobin = 0,
  kRandom = 1,  // seeded, recorded, reproducible
};

struct IoGroupConfig {
  IoPlacement placement = IoPlacement::kCoLocated;
  /// Nodes per group; 0 means one group spanning all nodes ("All").
  int group_size = 0;
  /// Size of the I/O node set. Under CoLocated this equals the compute node
  /// count and stage origin indexes it directly.
  int io_node_count = 1;
  /// Queued buffers on any single node that trigger its whole group's
  /// write session.
  int queue_threshold = 1;
  IoDistribution distribution = IoDistribution::kRoundRobin;
  std::uint64_t random_seed = 0;
  /// Directory receiving one file per write session.
  std::string directory;
  /// Session throughput in bytes per time unit; 0 = instant sessions.
  double disk_bandwidth = 0.0;
  /// Fixed simulated cost added to every session.
  double session_overhead = 0.0;

  void validate() const;
  int group_count() const;
  int group_of(int node) const;
};

/// One buffered or flushed chunk record.
struct DiskRecord {
  DataRegionId id;
  RegionKind kind = RegionKind::kDense2D;
  ElementKind element_kind = ElementKind::kU8;
  BoundingBox box;
  std::uint64_t seq = 0;
  std::vector<std::uint8_t> payload;
};

// Session file layout (little-endian):
//   "RTS1" u32 | session_seq u64 | record_count u32
//   records: ns str | key str | type_tag str | timestamp i64 | version i64
//          | kind u8 | element_kind u8 | bbox | seq u64
//          | payload_len u64 | payload
//   footer: record offsets u64 * record_count | footer_offset u64 | "RTSE"
// (str and bbox encodings match the template pack format.)
inline constexpr std::uint32_t kSessionMagic = 0x31535452;  // "RTS1"
inline constexpr std::uint32_t kSessionEndMagic = 0x45535452;  // "RTSE"

/// Returns the byte offset of each record in the written file.
std::vector<std::uint64_t> write_session_file(
    const std::string& path, std::uint64_t session_seq,
    const std::vector<DiskRecord>& records);
std::vector<DiskRecord> read_session_file(const std::string& path);
DiskRecord read_record_at(const std::string& path, std::uint64_t offset);

struct WriteSession {
  int group_id = 0;
  std::uint64_t session_seq = 0;
  std::string file;
  double start = 0.0;
  double duration = 0.0;
  /// (node, region id, box, bytes) per flushed buffer.
  struct Flushed {
    int node;
    DataRegionId id;
    BoundingBox box;
    std::uint64_t bytes;
  };
  std::vector<Flushed> flushed;
};

/// Stage acceptance bookkeeping: when the stage was requested vs when the
/// target node's group could accept it (deferred only by own-group sessions).
struct EnqueueInfo {
  int node = 0;
  int group = 0;
  double requested = 0.0;
  double effective = 0.0;
};

/// Disk-backed store. Stages append buffers to per-node queues; when any
/// node's queue reaches the threshold, its whole group enters a write session
/// flushing every member's buffers into one session file. Groups are
/// mutually independent. Reads force-flush pending buffers first (read
/// barrier), then assemble by global sequence replay.
class DiskStore : public StorageBackend {
 public:
  DiskStore(std::string name, IoGroupConfig config,
            std::shared_ptr<SequenceCounter> sequence,
            const Clock* clock = nullptr, TraceLog* trace = nullptr);

  const std::string& name() const override { return name_; }
  Completion stage_region(const DataRegion& region, int origin_node) override;
  DataRegion read_region(const DataRegionId& id,
                         const BoundingBox& query) override;
  Completion delete_region(const DataRegionId& id) override;

  struct TimedRead {
    DataRegion region;
    double ready_time = 0.0;
  };
  TimedRead read_region_at(const DataRegionId& id, const BoundingBox& query);

  /// Flushes every group holding buffers (the read barrier, callable
  /// directly at shutdown).
  void flush_all();

  const std::vector<WriteSession>& sessions() const { return sessions_; }
  const std::vector<EnqueueInfo>& enqueue_log() const { return enqueue_log_; }
  int queued_buffers(int node) const;
  const IoGroupConfig& config() const { return config_; }

 private:
  double now() const { return clock_ ? clock_->now() : 0.0; }
  void emit(const std::string& kind, const std::string& id,
            const std::string& device, std::uint64_t bytes);
  int pick_node(int origin_node);
  /// Flushes one group at simulated time `at`; returns session end time.
  double run_session(int group, double at);

  struct IndexEntry {
    BoundingBox box;
    std::uint64_t seq = 0;
    RegionKind kind = RegionKind::kDense2D;
    ElementKind element_kind = ElementKind::kU8;
    std::string file;
    std::uint64_t offset = 0;
  };

  std::string name_;
  IoGroupConfig config_;
  std::shared_ptr<SequenceCounter> sequence_;
  const Clock* clock_;
  TraceLog* trace_;
  std::vector<std::deque<DiskRecord>> queues_;
  std::vector<double> group_busy_until_;
  std::map<DataRegionId, std::vector<IndexEntry>> index_;
  std::vector<WriteSession> sessions_;
  std::vector<EnqueueInfo> enqueue_log_;
  std::uint64_t next_session_seq_ = 0;
  std::uint64_t rr_counter_ = 0;
  std::mt19937_64 rng_;
};

}  // namespace rt

#endif  // RT_DISK_STORE_HPP
