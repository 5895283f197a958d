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

#ifndef RT_SIM_HPP
#define RT_SIM_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rt/dataflow.hpp"
#include "rt/disk_store.hpp"
#include "rt/trace.hpp"
#include "rt/wrm.hpp"

namespace rt::sim {

/// One heterogeneous compute node: CPU core slots plus GPU slots sharing a
/// host-device link.
struct NodeSpec {
  int cpu_cores = 1;
  int gpus = 0;
  /// Host<->device link throughput in bytes per simulated time unit;
  /// 0 means transfers are instant.
  double gpu_transfer_bandwidth = 0.0;

  void validate() const;
};

/// How a stage's task types wire together inside one stage instance.
enum class StageGraph : std::uint8_t {
  kChain = 0,     // linear pipeline, each task depends on the previous
  kParallel = 1,  // independent tasks, no intra-stage edges
};

/// Cost and placement model for one fine-grain task type. The CPU cost is
/// sampled per task from a seeded uniform window around cost_mean.
struct TaskTypeProfile {
  std::string name;
  double cost_mean = 1.0;
  /// Half-width of the relative sampling window, in [0, 1): costs land in
  /// [mean*(1-spread), mean*(1+spread)].
  double cost_spread = 0.0;
  /// True acceleration of the GPU implementation over one CPU core.
  /// Meaningful only for dual-variant tasks.
  double gpu_speedup = 1.0;
  TaskVariants variants = TaskVariants::kBoth;
  /// What the scheduler believes the acceleration is. Defaults to the true
  /// gpu_speedup; error injection perturbs only this field, so scheduling
  /// decisions change while execution costs stay fixed.
  std::optional<double> speedup_estimate;
  /// Payload moved to / from the device when the task runs on a GPU.
  std::uint64_t bytes_in = 0;
  std::uint64_t bytes_out = 0;

  double estimate() const {
    return speedup_estimate ? *speedup_estimate : gpu_speedup;
  }
  void validate() const;
};

/// One coarse-grain stage kind: its name and the task types it expands into.
struct StageKindSpec {
  std::string kind;
  std::vector<std::string> task_types;
  StageGraph graph = StageGraph::kChain;
  /// Stage kinds this one consumes, per tile. Unset means the previous kind
  /// in declaration order (the first kind reads the tile's source region);
  /// an explicit empty list also reads the source region.
  std::optional<std::vector<std::string>> depends_on;
};

/// Declarative workload description: a spatial domain tiled into a regular
/// grid, a list of stage kinds applied to every tile in order (stage s of a
/// tile depends on stage s-1 of the same tile), and the task-type profiles
/// the stages expand into.
struct WorkloadSpec {
  BoundingBox domain;
  std::vector<std::int64_t> tile_extent;
  std::vector<TaskTypeProfile> profiles;
  std::vector<StageKindSpec> stage_kinds;

  void validate() const;
};

/// One fully resolved fine-grain task: the scheduler-visible node plus the
/// true execution model the event loop charges.
struct SimTask {
  TaskNode node;
  std::string profile;
  /// True compute time when executed on a GPU.
  double gpu_cost = 0.0;
  std::uint64_t bytes_in = 0;
  std::uint64_t bytes_out = 0;
};

struct SimStage {
  StageInstance stage;
  std::vector<SimTask> tasks;
};

/// A generated two-level graph: stage instances (one per tile per stage kind)
/// each expanding into its fine-grain task list.
struct Workload {
  BoundingBox domain;
  std::vector<BoundingBox> tiles;
  std::vector<SimStage> stages;
  std::vector<TaskTypeProfile> profiles;

  std::size_t task_count() const;
};

/// Expands a WorkloadSpec into stage instances and tasks. Deterministic for a
/// fixed (spec, seed) pair; per-task costs are sampled independently of the
/// speedup estimates, so perturbing estimates regenerates identical costs.
Workload generate_workload(const WorkloadSpec& spec, std::uint64_t seed);

/// Perturbs the scheduler-visible speedup estimates: dual-variant profiles
/// below the median estimate are inflated by e percent, above the median
/// deflated by e percent (clamped at a 0.01 floor); exactly-median profiles
/// and single-variant profiles are untouched. e must lie in [0, 100].
std::vector<TaskTypeProfile> inject_error(std::vector<TaskTypeProfile> profiles,
                                          double error_pct);

/// Storage backing the simulated stage data.
enum class SimStorage : std::uint8_t {
  kDms = 0,   // in-memory SFC-sharded store
  kDisk = 1,  // buffered queues + group write sessions
};

struct SimOptions {
  SchedulerKind scheduler = SchedulerKind::kFcfs;
  bool data_locality = false;
  bool prefetch = false;
  SimStorage storage = SimStorage::kDms;
  /// Shards for the DMS backend.
  int dms_shards = 4;
  /// Group/session layout for the disk backend.
  IoGroupConfig io_group;
  /// Worker-side ingest throughput for stage input reads, bytes per time
  /// unit; 0 = instant.
  double io_bandwidth = 0.0;
  /// Stage instances a worker processes concurrently; 0 = twice the node's
  /// slot count.
  int worker_window = 0;
  /// Default transfer-impact fraction for the data-locality GPU gate.
  double transfer_impact = 0.12;
  std::uint64_t seed = 1;
};

/// What one simulation produced. Busy times are summed per device class
/// across all nodes; the GPU task counters drive the per-type placement
/// fraction reported by sweeps.
struct RunMetrics {
  double makespan = 0.0;
  double cpu_busy = 0.0;
  double gpu_busy = 0.0;
  std::uint64_t transfer_bytes = 0;
  std::uint64_t tasks_total = 0;
  std::uint64_t tasks_on_gpu = 0;
  std::map<std::string, std::uint64_t> tasks_by_profile;
  std::map<std::string, std::uint64_t> gpu_tasks_by_profile;
  std::uint64_t write_sessions = 0;
  std::uint64_t stages_completed = 0;

  /// Fraction of this task type's executions that ran on a GPU.
  double gpu_fraction(const std::string& profile) const;
};

/// Runs the workload through the full stack (manager dispatch, worker
/// prepare, per-node WRM scheduling, storage staging) on simulated time.
/// Deterministic for fixed inputs. Trace records are appended to `trace`
/// when given, interleaved with the storage backend's own records.
RunMetrics run_sim(const Workload& workload, const std::vector<NodeSpec>& nodes,
                   const SimOptions& opts, TraceLog* trace = nullptr);

/// One sweep point: both schedulers run on the same error-injected workload.
struct SweepRow {
  double error_pct = 0.0;
  RunMetrics pats;
  RunMetrics fcfs;
};

/// Regenerates the workload per error level (same seed, perturbed estimates)
/// and runs PATS and FCFS on each. Throws ConfigError on an empty level list.
std::vector<SweepRow> sweep_error(const WorkloadSpec& spec,
                                  const std::vector<NodeSpec>& nodes,
                                  const SimOptions& opts,
                                  std::span<const double> error_levels);

}  // namespace rt::sim

#endif  // RT_SIM_HPP
