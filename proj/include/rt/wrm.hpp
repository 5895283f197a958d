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

#ifndef RT_WRM_HPP
#define RT_WRM_HPP

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "rt/data_region.hpp"

namespace rt {

enum class DeviceKind : std::uint8_t { kCpu = 0, kGpu = 1 };
enum class TaskVariants : std::uint8_t { kCpuOnly = 0, kGpuOnly = 1, kBoth = 2 };
enum class SchedulerKind : std::uint8_t { kFcfs = 0, kPats = 1 };

const char* to_string(DeviceKind device);
const char* to_string(TaskVariants variants);
const char* to_string(SchedulerKind scheduler);

/// Chunk-granular data reference used for reuse detection: two refs alias the
/// same resident data exactly when id and box match.
struct IoRef {
  DataRegionId id;
  BoundingBox box;
  std::uint64_t bytes = 0;

  bool same_chunk(const IoRef& o) const { return id == o.id && box == o.box; }
};

/// Fine-grain schedulable unit produced by a stage body.
struct TaskNode {
  std::uint64_t task_id = 0;
  std::set<std::uint64_t> deps;
  TaskVariants variants = TaskVariants::kBoth;
  /// Estimated GPU acceleration against one CPU core; set exactly when the
  /// task has both implementations.
  std::optional<double> speedup_estimate;
  std::vector<IoRef> io_refs;
  /// Simulated execution time on one CPU core; GPU time = cost_cpu / speedup.
  double cost_cpu = 1.0;
  /// Fraction of this task's device time spent on transfers; when absent the
  /// scheduler-wide default applies.
  std::optional<double> transfer_impact;
  /// Owning stage instance, zero when free-standing.
  std::uint64_t stage_id = 0;
  /// Optional real compute hook (unit tests; the simulator leaves it empty).
  std::function<void()> body;
};

/// Speedup key used for device picks: CPU-only tasks sort below every
/// dual-variant task, GPU-only tasks above.
double effective_speedup(const TaskNode& task);

bool device_compatible(const TaskNode& task, DeviceKind device);

/// Simulated duration on a device: cost_cpu on a CPU core; cost_cpu divided
/// by the speedup estimate on a GPU. A GPU-only task runs at cost_cpu on its
/// only device.
double device_cost(const TaskNode& task, DeviceKind device);

/// Byte volume of chunks referenced by both tasks (exact id+box matches).
std::uint64_t reuse_bytes(const TaskNode& a, const TaskNode& b);

struct WrmOptions {
  SchedulerKind scheduler = SchedulerKind::kFcfs;
  /// Enables the reuse-conscious pick in next_dl.
  bool data_locality = false;
  /// Default transfer-time fraction for the reuse gate.
  double transfer_impact = 0.12;
};

enum class TaskState : std::uint8_t {
  kPending = 0,
  kReady = 1,
  kRunning = 2,
  kDone = 3,
};

/// Worker-side scheduler: ready-queue ordering plus the FCFS/PATS device
/// pick rules. Pure state machine; the caller owns time and devices.
class WrmState {
 public:
  explicit WrmState(WrmOptions opts = {});

  /// Adds a task graph. Tasks from several stage instances share one queue.
  /// Throws ProtocolError on duplicate ids, ConfigError on malformed tasks or
  /// unknown dependencies, CycleError when the unfinished graph has a cycle.
  void submit(std::vector<TaskNode> tasks);

  /// Picks and starts the next task for an idle device slot, or nullopt.
  /// FCFS: first compatible in ready order. PATS: CPU takes the compatible
  /// minimum-speedup task, GPU the maximum.
  std::optional<std::uint64_t> next(DeviceKind device);

  /// Reuse-conscious pick after `just_finished` released the device. Falls
  /// back to the plain rule when no ready successor reuses its data.
  std::optional<std::uint64_t> next_dl(DeviceKind device,
                                       std::uint64_t just_finished);

  /// Marks a running task done; returns dependents that just became ready
  /// (ascending submission order). Throws ProtocolError otherwise.
  std::vector<std::uint64_t> complete(std::uint64_t task_id);

  const TaskNode& task(std::uint64_t id) const;
  TaskState state(std::uint64_t id) const;
  /// Ready ids in queue order: FCFS readiness order, or descending effective
  /// speedup under PATS (GPU picks the head, CPU the tail).
  std::vector<std::uint64_t> ready_ids() const;
  std::size_t ready_count() const { return ready_fifo_.size(); }
  std::size_t size() const { return tasks_.size(); }
  bool all_done() const;
  const WrmOptions& options() const { return opts_; }

 private:
  struct Entry {
    TaskNode node;
    TaskState state = TaskState::kPending;
    std::size_t remaining = 0;  // unfinished dependencies
    std::uint64_t seq = 0;      // submission order, PATS tie-break
  };

  struct ReadyKey {
    double speedup = 0.0;
    std::uint64_t seq = 0;
    std::uint64_t id = 0;

    bool operator<(const ReadyKey& o) const {
      if (speedup != o.speedup) return speedup < o.speedup;
      return seq < o.seq;
    }
  };

  const Entry& entry(std::uint64_t id) const;
  void make_ready(std::uint64_t id);
  void start(std::uint64_t id);
  std::optional<std::uint64_t> pick_plain(DeviceKind device) const;
  std::vector<std::uint64_t> ready_reusers(DeviceKind device,
                                           std::uint64_t just_finished) const;

  WrmOptions opts_;
  std::uint64_t next_seq_ = 0;
  std::map<std::uint64_t, Entry> tasks_;
  std::map<std::uint64_t, std::vector<std::uint64_t>> dependents_;
  std::vector<std::uint64_t> ready_fifo_;  // readiness order
  std::set<ReadyKey> ready_sorted_;        // (effective speedup, seq)
};

/// Three-phase GPU pipeline model: at most one upload, one compute, and one
/// download in flight; with overlap disabled every task serializes.
struct PrefetchTask {
  double upload = 0.0;
  double compute = 0.0;
  double download = 0.0;
};

struct PrefetchPhase {
  double upload_start = 0.0;
  double upload_end = 0.0;
  double compute_start = 0.0;
  double compute_end = 0.0;
  double download_start = 0.0;
  double download_end = 0.0;
};

struct PrefetchTimeline {
  std::vector<PrefetchPhase> phases;
  double makespan = 0.0;
};

PrefetchTimeline prefetch_pipeline(std::span<const PrefetchTask> tasks,
                                   bool overlap = true);

}  // namespace rt

#endif  // RT_WRM_HPP
