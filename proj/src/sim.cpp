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

#include "rt/sim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <memory>
#include <queue>
#include <set>

#include "rt/dms.hpp"
#include "rt/partition.hpp"

namespace rt::sim {

namespace {

constexpr double kSpeedupFloor = 0.01;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Portable uniform draw in [0, 1) so workloads are identical across
/// standard-library implementations.
double unit_draw(std::uint64_t key) {
  return double(splitmix64(key) >> 11) * 0x1.0p-53;
}

/// Resolves each stage kind's dependency list to kind indices, defaulting to
/// the previous kind. Throws ConfigError on unknown names and CycleError
/// (naming the cycle) when the kind graph is not acyclic.
std::vector<std::vector<std::size_t>> stage_dep_indices(
    const std::vector<StageKindSpec>& kinds) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < kinds.size(); ++i) index[kinds[i].kind] = i;

  std::vector<std::vector<std::size_t>> deps(kinds.size());
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    if (kinds[i].depends_on) {
      for (const auto& name : *kinds[i].depends_on) {
        auto it = index.find(name);
        if (it == index.end()) {
          throw ConfigError("stage kind " + kinds[i].kind +
                            " depends on unknown stage kind " + name);
        }
        deps[i].push_back(it->second);
      }
    } else if (i > 0) {
      deps[i] = {i - 1};
    }
  }

  // Kahn's algorithm; anything left over sits on a cycle.
  std::vector<std::size_t> remaining_deps(kinds.size(), 0);
  std::vector<std::vector<std::size_t>> consumers(kinds.size());
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    remaining_deps[i] = deps[i].size();
    for (std::size_t d : deps[i]) consumers[d].push_back(i);
  }
  std::deque<std::size_t> frontier;
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    if (remaining_deps[i] == 0) frontier.push_back(i);
  }
  std::size_t processed = 0;
  while (!frontier.empty()) {
    const std::size_t i = frontier.front();
    frontier.pop_front();
    ++processed;
    for (std::size_t c : consumers[i]) {
      if (--remaining_deps[c] == 0) frontier.push_back(c);
    }
  }
  if (processed < kinds.size()) {
    // Walk the stuck subgraph to print one concrete cycle.
    std::size_t start = 0;
    while (remaining_deps[start] == 0) ++start;
    std::vector<std::size_t> path;
    std::vector<bool> seen(kinds.size(), false);
    std::size_t cur = start;
    while (!seen[cur]) {
      seen[cur] = true;
      path.push_back(cur);
      for (std::size_t d : deps[cur]) {
        if (remaining_deps[d] > 0) {
          cur = d;
          break;
        }
      }
    }
    std::string msg = "stage kind dependency cycle: ";
    bool in_cycle = false;
    for (std::size_t i : path) {
      if (i == cur) in_cycle = true;
      if (in_cycle) msg += kinds[i].kind + " -> ";
    }
    msg += kinds[cur].kind;
    throw CycleError(msg);
  }
  return deps;
}

}  // namespace

void NodeSpec::validate() const {
  if (cpu_cores < 0 || gpus < 0) {
    throw ConfigError("node slot counts must be non-negative");
  }
  if (cpu_cores + gpus == 0) {
    throw ConfigError("a node needs at least one CPU core or GPU");
  }
  if (gpu_transfer_bandwidth < 0) {
    throw ConfigError("gpu_transfer_bandwidth must be non-negative");
  }
}

void TaskTypeProfile::validate() const {
  if (name.empty()) throw ConfigError("task type profile needs a name");
  if (!(cost_mean > 0)) {
    throw ConfigError("cost_mean must be positive for " + name);
  }
  if (cost_spread < 0 || cost_spread >= 1) {
    throw ConfigError("cost_spread must lie in [0, 1) for " + name);
  }
  if (variants == TaskVariants::kBoth) {
    if (!(gpu_speedup > 0)) {
      throw ConfigError("gpu_speedup must be positive for " + name);
    }
    if (speedup_estimate && !(*speedup_estimate > 0)) {
      throw ConfigError("speedup_estimate must be positive for " + name);
    }
  } else if (speedup_estimate) {
    throw ConfigError("speedup_estimate is meaningful only for dual-variant "
                      "task type " + name);
  }
}

void WorkloadSpec::validate() const {
  if (domain.empty()) throw ConfigError("workload domain is empty");
  if (domain.dims() != 2) {
    throw ConfigError("workloads are defined over 2-D domains");
  }
  if (int(tile_extent.size()) != domain.dims()) {
    throw ConfigError("tile_extent dimensionality mismatch");
  }
  for (std::int64_t e : tile_extent) {
    if (e <= 0) throw ConfigError("tile extents must be positive");
  }
  if (profiles.empty()) throw ConfigError("no task type profiles");
  std::set<std::string> names;
  for (const auto& p : profiles) {
    p.validate();
    if (!names.insert(p.name).second) {
      throw ConfigError("duplicate task type profile " + p.name);
    }
  }
  if (stage_kinds.empty()) throw ConfigError("no stage kinds");
  std::set<std::string> kinds;
  for (const auto& s : stage_kinds) {
    if (s.kind.empty()) throw ConfigError("stage kind needs a name");
    if (s.kind == "src") {
      throw ConfigError("stage kind name 'src' is reserved for inputs");
    }
    if (!kinds.insert(s.kind).second) {
      throw ConfigError("duplicate stage kind " + s.kind);
    }
    if (s.task_types.empty()) {
      throw ConfigError("stage kind " + s.kind + " has no task types");
    }
    for (const auto& t : s.task_types) {
      if (names.count(t) == 0) {
        throw ConfigError("stage kind " + s.kind +
                          " references unknown task type " + t);
      }
    }
  }
  stage_dep_indices(stage_kinds);  // rejects unknown deps and cycles
}

std::size_t Workload::task_count() const {
  std::size_t n = 0;
  for (const auto& s : stages) n += s.tasks.size();
  return n;
}

double RunMetrics::gpu_fraction(const std::string& profile) const {
  auto total = tasks_by_profile.find(profile);
  if (total == tasks_by_profile.end() || total->second == 0) return 0.0;
  auto gpu = gpu_tasks_by_profile.find(profile);
  const std::uint64_t g = gpu == gpu_tasks_by_profile.end() ? 0 : gpu->second;
  return double(g) / double(total->second);
}

Workload generate_workload(const WorkloadSpec& spec, std::uint64_t seed) {
  spec.validate();
  Workload wl;
  wl.domain = spec.domain;
  wl.tiles = partition_regular(spec.domain, spec.tile_extent);
  wl.profiles = spec.profiles;

  std::map<std::string, const TaskTypeProfile*> by_name;
  for (const auto& p : spec.profiles) by_name[p.name] = &p;

  const auto kind_deps = stage_dep_indices(spec.stage_kinds);
  const std::size_t kind_count = spec.stage_kinds.size();

  std::uint64_t next_task = 1;
  for (std::size_t tile_idx = 0; tile_idx < wl.tiles.size(); ++tile_idx) {
    const BoundingBox& tile = wl.tiles[tile_idx];
    const std::string tile_key = "tile" + std::to_string(tile_idx);
    for (std::size_t s = 0; s < kind_count; ++s) {
      const StageKindSpec& kind = spec.stage_kinds[s];
      SimStage ss;
      // Stage ids come from a formula so a kind may depend on one declared
      // later; the manager accepts forward references within a tile.
      ss.stage.stage_id = tile_idx * kind_count + s + 1;
      ss.stage.stage_kind = kind.kind;
      for (std::size_t d : kind_deps[s]) {
        ss.stage.deps.insert(tile_idx * kind_count + d + 1);
      }

      const DataRegionId output_id{"sim", tile_key, kind.kind, 0, 0};
      if (kind_deps[s].empty()) {
        const DataRegionId src_id{"sim", tile_key, "src", 0, 0};
        ss.stage.region_descriptors.push_back(
            RegionDescriptor{src_id, tile, IoMode::kInput, "store", false});
      } else {
        for (std::size_t d : kind_deps[s]) {
          const DataRegionId dep_id{"sim", tile_key,
                                    spec.stage_kinds[d].kind, 0, 0};
          ss.stage.region_descriptors.push_back(
              RegionDescriptor{dep_id, tile, IoMode::kInput, "store", false});
        }
      }
      const DataRegionId input_id = ss.stage.region_descriptors.front().id;
      ss.stage.region_descriptors.push_back(
          RegionDescriptor{output_id, tile, IoMode::kOutput, "store", false});

      std::uint64_t prev_task = 0;
      for (std::size_t pos = 0; pos < kind.task_types.size(); ++pos) {
        const TaskTypeProfile& p = *by_name.at(kind.task_types[pos]);
        // Costs depend only on (seed, stage, position): perturbing the
        // estimates regenerates the exact same execution model.
        const double u = unit_draw(splitmix64(seed ^ ss.stage.stage_id * 0x9e37ULL) + pos);
        const double cost =
            p.cost_mean * (1.0 - p.cost_spread + 2.0 * p.cost_spread * u);

        SimTask task;
        task.profile = p.name;
        task.bytes_in = p.bytes_in;
        task.bytes_out = p.bytes_out;
        task.node.task_id = next_task++;
        task.node.stage_id = ss.stage.stage_id;
        task.node.variants = p.variants;
        task.node.cost_cpu = cost;
        if (p.variants == TaskVariants::kBoth) {
          task.node.speedup_estimate = p.estimate();
          task.gpu_cost = cost / p.gpu_speedup;
        } else {
          task.gpu_cost = cost;  // a single-variant task has one cost
        }
        if (kind.graph == StageGraph::kChain && pos > 0) {
          task.node.deps = {prev_task};
        }
        task.node.io_refs = {
            IoRef{input_id, tile, p.bytes_in + p.bytes_out}};
        prev_task = task.node.task_id;
        ss.tasks.push_back(std::move(task));
      }
      std::vector<TaskNode> nodes;
      nodes.reserve(ss.tasks.size());
      for (const auto& t : ss.tasks) nodes.push_back(t.node);
      ss.stage.body = [nodes]() { return nodes; };

      wl.stages.push_back(std::move(ss));
    }
  }
  return wl;
}

std::vector<TaskTypeProfile> inject_error(std::vector<TaskTypeProfile> profiles,
                                          double error_pct) {
  if (!(error_pct >= 0.0 && error_pct <= 100.0)) {
    throw ConfigError("error percentage must lie in [0, 100]");
  }
  std::vector<double> estimates;
  for (const auto& p : profiles) {
    if (p.variants == TaskVariants::kBoth) estimates.push_back(p.estimate());
  }
  if (estimates.empty()) return profiles;
  std::sort(estimates.begin(), estimates.end());
  const std::size_t n = estimates.size();
  const double median = n % 2 == 1
                            ? estimates[n / 2]
                            : 0.5 * (estimates[n / 2 - 1] + estimates[n / 2]);
  const double f = error_pct / 100.0;
  for (auto& p : profiles) {
    if (p.variants != TaskVariants::kBoth) continue;
    const double s = p.estimate();
    if (s < median) {
      p.speedup_estimate = s * (1.0 + f);
    } else if (s > median) {
      p.speedup_estimate = std::max(kSpeedupFloor, s * (1.0 - f));
    } else {
      p.speedup_estimate = s;
    }
  }
  return profiles;
}

// ---------------------------------------------------------------------------
// Event loop

namespace {

enum class EventType : std::uint8_t {
  kIoDone = 0,    // worker I/O agent finished its current operation
  kTaskDone = 1,  // device slot finished a task
  kGpuPoll = 2,   // prefetch upload channel freed; try admitting again
};

struct Event {
  double time = 0.0;
  std::uint64_t seq = 0;
  EventType type = EventType::kIoDone;
  int worker = 0;
  int slot = 0;
  std::uint64_t id = 0;  // task or stage id, by type

  bool operator>(const Event& o) const {
    if (time != o.time) return time > o.time;
    return seq > o.seq;
  }
};

struct IoOp {
  enum Kind : std::uint8_t { kPrepare, kFinalize } kind = kPrepare;
  std::uint64_t stage_id = 0;
};

struct Slot {
  DeviceKind kind = DeviceKind::kCpu;
  bool prefetching = false;
  std::optional<std::uint64_t> running;  // unused for prefetching slots
  int in_flight = 0;
  std::optional<std::uint64_t> last_ref;  // residency anchor for DL picks
  double upload_free = 0.0;
  double compute_free = 0.0;
  double download_free = 0.0;
};

struct WorkerState {
  int index = 0;
  NodeSpec spec;
  std::unique_ptr<WrmState> wrm;
  std::vector<Slot> slots;
  int window = 0;
  int active_stages = 0;
  std::deque<IoOp> io_queue;
  bool io_busy = false;
  std::map<std::uint64_t, int> remaining;  // stage -> unfinished task count
  std::map<std::uint64_t, RegionTemplate> local;  // stage -> local template
};

struct SimEngine {
  const Workload& workload;
  const SimOptions& opts;
  TraceLog* trace;
  Clock clock;
  ManagerState manager;
  StorageRegistry registry;
  StorageBackend* store = nullptr;
  DiskStore* disk = nullptr;
  std::vector<WorkerState> workers;
  std::map<std::uint64_t, const SimStage*> stage_by_id;
  std::map<std::uint64_t, const SimTask*> task_by_id;
  std::priority_queue<Event, std::vector<Event>, std::greater<Event>> events;
  std::uint64_t next_seq = 0;
  double max_time = 0.0;
  RunMetrics metrics;

  SimEngine(const Workload& wl, const std::vector<NodeSpec>& nodes,
            const SimOptions& o, TraceLog* t)
      : workload(wl), opts(o), trace(t) {
    for (const auto& n : nodes) n.validate();
    if (nodes.empty()) throw ConfigError("at least one node is required");
    if (opts.dms_shards < 1) throw ConfigError("dms_shards must be >= 1");
    if (opts.transfer_impact < 0 || opts.transfer_impact >= 1) {
      throw ConfigError("transfer_impact must lie in [0, 1)");
    }
    if (opts.io_bandwidth < 0) {
      throw ConfigError("io_bandwidth must be non-negative");
    }
    if (opts.worker_window < 0) {
      throw ConfigError("worker_window must be non-negative");
    }

    make_store(int(nodes.size()));
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      WorkerState w;
      w.index = int(i);
      w.spec = nodes[i];
      w.wrm = std::make_unique<WrmState>(WrmOptions{
          opts.scheduler, opts.data_locality, opts.transfer_impact});
      for (int c = 0; c < nodes[i].cpu_cores; ++c) {
        w.slots.push_back(Slot{DeviceKind::kCpu, false, {}, 0, {}, 0, 0, 0});
      }
      for (int g = 0; g < nodes[i].gpus; ++g) {
        w.slots.push_back(
            Slot{DeviceKind::kGpu, opts.prefetch, {}, 0, {}, 0, 0, 0});
      }
      const int slot_count = int(w.slots.size());
      w.window = opts.worker_window > 0 ? opts.worker_window : 2 * slot_count;
      workers.push_back(std::move(w));
    }

    for (const auto& ss : workload.stages) {
      stage_by_id[ss.stage.stage_id] = &ss;
      for (const auto& t : ss.tasks) task_by_id[t.node.task_id] = &t;
      manager.add_stage(ss.stage);
    }
  }

  void make_store(int node_count) {
    if (opts.storage == SimStorage::kDms) {
      DmsConfig cfg;
      const int dims = workload.domain.dims();
      const BoundingBox& t0 = workload.tiles.front();
      std::vector<std::int64_t> cells(std::size_t(dims), 0);
      int order = 1;
      for (int d = 0; d < dims; ++d) {
        cfg.grid_origin.push_back(workload.domain.lo(d));
        // Cell size follows the tile grid so tile reads stay single-cell.
        cfg.cell_extent.push_back(t0.extent(d));
        cells[std::size_t(d)] =
            (workload.domain.extent(d) + t0.extent(d) - 1) / t0.extent(d);
        while ((std::int64_t(1) << order) < cells[std::size_t(d)]) ++order;
      }
      cfg.hilbert = sfc::HilbertParams{dims, order};
      std::vector<std::int64_t> cell_lo(std::size_t(dims), 0);
      std::vector<std::int64_t> cell_hi(std::size_t(dims), 0);
      for (int d = 0; d < dims; ++d) {
        cell_hi[std::size_t(d)] = cells[std::size_t(d)] - 1;
      }
      cfg.occupied = {BoundingBox(dims, cell_lo.data(), cell_hi.data())};
      cfg.shard_count = opts.dms_shards;
      auto dms = std::make_shared<DmsStore>("store", cfg, registry.sequence(),
                                            &clock, trace);
      store = dms.get();
      registry.add(std::move(dms));
    } else {
      IoGroupConfig cfg = opts.io_group;
      if (cfg.io_node_count <= 0) cfg.io_node_count = node_count;
      auto d = std::make_shared<DiskStore>("store", cfg, registry.sequence(),
                                           &clock, trace);
      disk = d.get();
      store = d.get();
      registry.add(std::move(d));
    }
  }

  void emit(const std::string& kind, const std::string& id,
            const std::string& device, std::uint64_t bytes) {
    if (trace) trace->emit(clock.now(), kind, id, device, bytes);
  }

  void push(double time, EventType type, int worker, int slot,
            std::uint64_t id) {
    events.push(Event{time, next_seq++, type, worker, slot, id});
  }

  std::string device_name(const WorkerState& w, int slot_idx) const {
    const Slot& s = w.slots[std::size_t(slot_idx)];
    const int cpu_count = w.spec.cpu_cores;
    const std::string dev =
        s.kind == DeviceKind::kCpu
            ? "cpu" + std::to_string(slot_idx)
            : "gpu" + std::to_string(slot_idx - cpu_count);
    return "w" + std::to_string(w.index) + "." + dev;
  }

  // Stages every tile's source region so first-stage inputs exist.
  void bootstrap() {
    clock.set(0.0);
    for (std::size_t i = 0; i < workload.tiles.size(); ++i) {
      const BoundingBox& tile = workload.tiles[i];
      DataRegion src(DataRegionId{"sim", "tile" + std::to_string(i), "src",
                                  0, 0},
                     RegionKind::kDense2D, ElementKind::kU8, tile);
      src.put_chunk(tile,
                    std::vector<std::uint8_t>(std::size_t(tile.volume()),
                                              std::uint8_t((i * 7 + 1) % 251)));
      store->stage_region(src, int(i) % int(workers.size()));
    }
  }

  void dispatch_pass(double t) {
    for (auto& w : workers) {
      while (w.active_stages < w.window) {
        auto sid = manager.dispatch(w.index);
        if (!sid) break;
        ++w.active_stages;
        enqueue_io(w, IoOp{IoOp::kPrepare, *sid}, t);
      }
    }
  }

  void enqueue_io(WorkerState& w, IoOp op, double t) {
    w.io_queue.push_back(op);
    if (!w.io_busy) begin_io(w, t);
  }

  void begin_io(WorkerState& w, double t) {
    const IoOp op = w.io_queue.front();
    w.io_queue.pop_front();
    w.io_busy = true;
    clock.set(t);
    double end = t;
    if (op.kind == IoOp::kPrepare) {
      const SimStage& ss = *stage_by_id.at(op.stage_id);
      RegionTemplate local = worker_prepare(ss.stage, registry);
      std::uint64_t bytes = 0;
      for (const auto& d : ss.stage.region_descriptors) {
        if (d.io_mode == IoMode::kOutput) continue;
        const DataRegion* r = local.get_data_region(d.id);
        if (r == nullptr || !r->materialized()) continue;
        for (const auto& [box, chunk] : r->chunks()) {
          bytes += chunk.payload.size();
        }
      }
      if (opts.io_bandwidth > 0) end += double(bytes) / opts.io_bandwidth;
      w.local.emplace(op.stage_id, std::move(local));
      emit("stage_ready", std::to_string(op.stage_id),
           "w" + std::to_string(w.index) + ".io", bytes);
    } else {
      end = run_finalize(w, op.stage_id, t);
    }
    push(end, EventType::kIoDone, w.index, int(op.kind), op.stage_id);
  }

  double run_finalize(WorkerState& w, std::uint64_t stage_id, double t) {
    const SimStage& ss = *stage_by_id.at(stage_id);
    RegionTemplate& local = w.local.at(stage_id);
    // The stage's compute produced its outputs; materialize them with a
    // deterministic payload before staging.
    std::uint64_t out_bytes = 0;
    for (std::size_t i = 0; i < ss.stage.region_descriptors.size(); ++i) {
      const auto& d = ss.stage.region_descriptors[i];
      if (d.io_mode == IoMode::kInput) continue;
      DataRegion* r = local.get_data_region(d.id);
      if (r == nullptr) continue;
      const std::uint8_t fill =
          std::uint8_t((stage_id * 31 + i * 7 + 3) % 251);
      r->put_chunk(d.query, std::vector<std::uint8_t>(
                                std::size_t(d.query.volume()), fill));
      out_bytes += std::uint64_t(d.query.volume());
    }
    auto completions = stage_finalize(local, ss.stage, registry, w.index);
    double end = t;
    for (const auto& c : completions) {
      if (c.done()) end = std::max(end, c.ready_time());
    }
    emit("stage_done", std::to_string(stage_id),
         "w" + std::to_string(w.index) + ".io", out_bytes);
    return end;
  }

  void submit_stage_tasks(WorkerState& w, std::uint64_t stage_id, double t) {
    const SimStage& ss = *stage_by_id.at(stage_id);
    std::vector<TaskNode> nodes;
    nodes.reserve(ss.tasks.size());
    for (const auto& task : ss.tasks) nodes.push_back(task.node);
    w.wrm->submit(std::move(nodes));
    w.remaining[stage_id] = int(ss.tasks.size());
    if (ss.tasks.empty()) finish_stage_compute(w, stage_id, t);
  }

  void finish_stage_compute(WorkerState& w, std::uint64_t stage_id, double t) {
    w.remaining.erase(stage_id);
    enqueue_io(w, IoOp{IoOp::kFinalize, stage_id}, t);
  }

  std::uint64_t reuse_savings(const Slot& slot, const TaskNode& node) const {
    if (!opts.data_locality || !slot.last_ref) return 0;
    auto it = task_by_id.find(*slot.last_ref);
    if (it == task_by_id.end()) return 0;
    return reuse_bytes(it->second->node, node);
  }

  void try_assign(WorkerState& w, double t) {
    bool progress = true;
    while (progress) {
      progress = false;
      for (std::size_t s = 0; s < w.slots.size(); ++s) {
        Slot& slot = w.slots[s];
        const bool available = slot.prefetching
                                   ? slot.upload_free <= t
                                   : !slot.running.has_value();
        if (!available) continue;
        std::optional<std::uint64_t> pick;
        if (opts.data_locality && slot.last_ref &&
            w.wrm->state(*slot.last_ref) == TaskState::kDone) {
          pick = w.wrm->next_dl(slot.kind, *slot.last_ref);
        } else {
          pick = w.wrm->next(slot.kind);
        }
        if (!pick) continue;
        start_task(w, int(s), *pick, t);
        progress = true;
      }
    }
  }

  void start_task(WorkerState& w, int slot_idx, std::uint64_t task_id,
                  double t) {
    Slot& slot = w.slots[std::size_t(slot_idx)];
    const SimTask& task = *task_by_id.at(task_id);
    metrics.tasks_total += 1;
    metrics.tasks_by_profile[task.profile] += 1;

    if (slot.kind == DeviceKind::kCpu) {
      const double duration = task.node.cost_cpu;
      slot.running = task_id;
      metrics.cpu_busy += duration;
      emit("task_start", std::to_string(task_id), device_name(w, slot_idx), 0);
      push(t + duration, EventType::kTaskDone, w.index, slot_idx, task_id);
      return;
    }

    metrics.tasks_on_gpu += 1;
    metrics.gpu_tasks_by_profile[task.profile] += 1;
    const double bw = w.spec.gpu_transfer_bandwidth;
    const std::uint64_t saved = std::min(reuse_savings(slot, task.node),
                                         task.bytes_in + task.bytes_out);
    const std::uint64_t in_eff =
        task.bytes_in > saved ? task.bytes_in - saved : 0;
    const std::uint64_t out_eff =
        saved > task.bytes_in
            ? task.bytes_out - std::min(task.bytes_out, saved - task.bytes_in)
            : task.bytes_out;
    const std::uint64_t moved = in_eff + out_eff;
    metrics.transfer_bytes += moved;
    metrics.gpu_busy += task.gpu_cost;
    emit("task_start", std::to_string(task_id), device_name(w, slot_idx),
         moved);

    const double up = bw > 0 ? double(in_eff) / bw : 0.0;
    const double down = bw > 0 ? double(out_eff) / bw : 0.0;
    if (!slot.prefetching) {
      slot.running = task_id;
      const double duration = up + task.gpu_cost + down;
      push(t + duration, EventType::kTaskDone, w.index, slot_idx, task_id);
      return;
    }

    // Three-phase pipeline: the next admission may begin once the upload
    // channel frees, overlapping with this task's compute and download.
    const double u_start = std::max(t, slot.upload_free);
    const double u_end = u_start + up;
    const double c_end = std::max(u_end, slot.compute_free) + task.gpu_cost;
    const double d_end = std::max(c_end, slot.download_free) + down;
    slot.upload_free = u_end;
    slot.compute_free = c_end;
    slot.download_free = d_end;
    slot.in_flight += 1;
    slot.last_ref = task_id;  // the most recently admitted resident data
    push(u_end, EventType::kGpuPoll, w.index, slot_idx, 0);
    push(d_end, EventType::kTaskDone, w.index, slot_idx, task_id);
  }

  void on_task_done(WorkerState& w, int slot_idx, std::uint64_t task_id,
                    double t) {
    Slot& slot = w.slots[std::size_t(slot_idx)];
    if (slot.prefetching) {
      slot.in_flight -= 1;
    } else {
      slot.running.reset();
      slot.last_ref = task_id;
    }
    emit("task_done", std::to_string(task_id), device_name(w, slot_idx), 0);
    w.wrm->complete(task_id);

    const std::uint64_t stage_id = task_by_id.at(task_id)->node.stage_id;
    auto rem = w.remaining.find(stage_id);
    if (rem != w.remaining.end() && --rem->second == 0) {
      finish_stage_compute(w, stage_id, t);
    }
  }

  void on_io_done(WorkerState& w, IoOp::Kind kind, std::uint64_t stage_id,
                  double t) {
    w.io_busy = false;
    if (kind == IoOp::kPrepare) {
      submit_stage_tasks(w, stage_id, t);
    } else {
      w.local.erase(stage_id);
      --w.active_stages;
      metrics.stages_completed += 1;
      manager.stage_complete(stage_id);
      dispatch_pass(t);
    }
    if (!w.io_queue.empty() && !w.io_busy) begin_io(w, t);
  }

  RunMetrics run() {
    bootstrap();
    dispatch_pass(0.0);
    for (auto& w : workers) try_assign(w, 0.0);

    while (!events.empty()) {
      const Event ev = events.top();
      events.pop();
      clock.set(ev.time);
      max_time = std::max(max_time, ev.time);
      WorkerState& w = workers[std::size_t(ev.worker)];
      switch (ev.type) {
        case EventType::kIoDone:
          on_io_done(w, IoOp::Kind(ev.slot), ev.id, ev.time);
          break;
        case EventType::kTaskDone:
          on_task_done(w, ev.slot, ev.id, ev.time);
          break;
        case EventType::kGpuPoll:
          break;  // admission happens in the pass below
      }
      for (auto& ww : workers) try_assign(ww, ev.time);
    }

    if (!manager.all_done()) {
      throw ProtocolError("simulation wedged with incomplete stages");
    }
    metrics.makespan = max_time;
    if (disk != nullptr) {
      // Shutdown barrier: flush trailing buffers, then count sessions.
      disk->flush_all();
      metrics.write_sessions = std::uint64_t(disk->sessions().size());
    }
    return metrics;
  }
};

}  // namespace

RunMetrics run_sim(const Workload& workload, const std::vector<NodeSpec>& nodes,
                   const SimOptions& opts, TraceLog* trace) {
  SimEngine engine(workload, nodes, opts, trace);
  return engine.run();
}

std::vector<SweepRow> sweep_error(const WorkloadSpec& spec,
                                  const std::vector<NodeSpec>& nodes,
                                  const SimOptions& opts,
                                  std::span<const double> error_levels) {
  if (error_levels.empty()) {
    throw ConfigError("sweep needs at least one error level");
  }
  std::vector<SweepRow> rows;
  for (const double e : error_levels) {
    WorkloadSpec perturbed = spec;
    perturbed.profiles = inject_error(spec.profiles, e);
    const Workload wl = generate_workload(perturbed, opts.seed);
    SweepRow row;
    row.error_pct = e;
    SimOptions pats = opts;
    pats.scheduler = SchedulerKind::kPats;
    row.pats = run_sim(wl, nodes, pats);
    SimOptions fcfs = opts;
    fcfs.scheduler = SchedulerKind::kFcfs;
    row.fcfs = run_sim(wl, nodes, fcfs);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace rt::sim
