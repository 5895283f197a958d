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

#include "rt/wrm.hpp"

#include <algorithm>
#include <deque>
#include <limits>

#include "rt/error.hpp"

namespace rt {

const char* to_string(DeviceKind device) {
  return device == DeviceKind::kCpu ? "cpu" : "gpu";
}

const char* to_string(TaskVariants variants) {
  switch (variants) {
    case TaskVariants::kCpuOnly:
      return "cpu_only";
    case TaskVariants::kGpuOnly:
      return "gpu_only";
    case TaskVariants::kBoth:
      return "both";
  }
  return "?";
}

const char* to_string(SchedulerKind scheduler) {
  return scheduler == SchedulerKind::kFcfs ? "fcfs" : "pats";
}

double effective_speedup(const TaskNode& task) {
  switch (task.variants) {
    case TaskVariants::kCpuOnly:
      return 0.0;
    case TaskVariants::kGpuOnly:
      return std::numeric_limits<double>::infinity();
    case TaskVariants::kBoth:
      return task.speedup_estimate.value_or(1.0);
  }
  return 1.0;
}

bool device_compatible(const TaskNode& task, DeviceKind device) {
  switch (task.variants) {
    case TaskVariants::kCpuOnly:
      return device == DeviceKind::kCpu;
    case TaskVariants::kGpuOnly:
      return device == DeviceKind::kGpu;
    case TaskVariants::kBoth:
      return true;
  }
  return false;
}

double device_cost(const TaskNode& task, DeviceKind device) {
  if (device == DeviceKind::kCpu) return task.cost_cpu;
  if (task.variants == TaskVariants::kBoth) {
    return task.cost_cpu / *task.speedup_estimate;
  }
  return task.cost_cpu;
}

std::uint64_t reuse_bytes(const TaskNode& a, const TaskNode& b) {
  std::uint64_t total = 0;
  for (const auto& ra : a.io_refs) {
    for (const auto& rb : b.io_refs) {
      if (ra.same_chunk(rb)) {
        total += std::min(ra.bytes, rb.bytes);
        break;
      }
    }
  }
  return total;
}

WrmState::WrmState(WrmOptions opts) : opts_(opts) {
  if (opts_.transfer_impact < 0.0 || opts_.transfer_impact >= 1.0) {
    throw ConfigError("transfer_impact must lie in [0, 1)");
  }
}

const WrmState::Entry& WrmState::entry(std::uint64_t id) const {
  auto it = tasks_.find(id);
  if (it == tasks_.end()) {
    throw ProtocolError("unknown task id " + std::to_string(id));
  }
  return it->second;
}

const TaskNode& WrmState::task(std::uint64_t id) const {
  return entry(id).node;
}

TaskState WrmState::state(std::uint64_t id) const { return entry(id).state; }

bool WrmState::all_done() const {
  return std::all_of(tasks_.begin(), tasks_.end(), [](const auto& kv) {
    return kv.second.state == TaskState::kDone;
  });
}

void WrmState::submit(std::vector<TaskNode> tasks) {
  // Validate the batch before mutating any state.
  for (const auto& t : tasks) {
    if (tasks_.count(t.task_id) > 0) {
      throw ProtocolError("duplicate task id " + std::to_string(t.task_id));
    }
    if (t.cost_cpu <= 0.0) {
      throw ConfigError("task cost must be positive");
    }
    const bool has_speedup = t.speedup_estimate.has_value();
    if ((t.variants == TaskVariants::kBoth) != has_speedup) {
      throw ConfigError(
          "speedup estimate must be set exactly for dual-variant tasks");
    }
    if (has_speedup && *t.speedup_estimate <= 0.0) {
      throw ConfigError("speedup estimate must be positive");
    }
    if (t.transfer_impact &&
        (*t.transfer_impact < 0.0 || *t.transfer_impact >= 1.0)) {
      throw ConfigError("transfer_impact must lie in [0, 1)");
    }
  }
  std::set<std::uint64_t> batch_ids;
  for (const auto& t : tasks) {
    if (!batch_ids.insert(t.task_id).second) {
      throw ProtocolError("duplicate task id " + std::to_string(t.task_id));
    }
  }
  for (const auto& t : tasks) {
    for (std::uint64_t dep : t.deps) {
      if (batch_ids.count(dep) == 0 && tasks_.count(dep) == 0) {
        throw ConfigError("task " + std::to_string(t.task_id) +
                          " depends on unknown task " + std::to_string(dep));
      }
    }
  }

  // Cycle check over all unfinished tasks plus the batch (Kahn's algorithm).
  {
    std::map<std::uint64_t, std::size_t> degree;
    std::map<std::uint64_t, std::vector<std::uint64_t>> out;
    auto not_done = [&](std::uint64_t id) {
      auto it = tasks_.find(id);
      return it == tasks_.end() || it->second.state != TaskState::kDone;
    };
    auto add_edges = [&](const TaskNode& t) {
      degree.try_emplace(t.task_id, 0);
      for (std::uint64_t dep : t.deps) {
        if (!not_done(dep)) continue;
        out[dep].push_back(t.task_id);
        ++degree[t.task_id];
      }
    };
    for (const auto& [id, e] : tasks_) {
      if (e.state != TaskState::kDone) add_edges(e.node);
    }
    for (const auto& t : tasks) add_edges(t);
    std::deque<std::uint64_t> frontier;
    for (const auto& [id, d] : degree) {
      if (d == 0) frontier.push_back(id);
    }
    std::size_t seen = 0;
    while (!frontier.empty()) {
      const std::uint64_t id = frontier.front();
      frontier.pop_front();
      ++seen;
      for (std::uint64_t succ : out[id]) {
        if (--degree[succ] == 0) frontier.push_back(succ);
      }
    }
    if (seen != degree.size()) {
      throw CycleError("task graph contains a dependency cycle");
    }
  }

  // Commit, in batch order so submission sequence is the FCFS order.
  std::vector<std::uint64_t> to_ready;
  for (auto& t : tasks) {
    Entry e;
    e.seq = next_seq_++;
    std::size_t remaining = 0;
    for (std::uint64_t dep : t.deps) {
      auto it = tasks_.find(dep);
      const bool done = it != tasks_.end() &&
                        it->second.state == TaskState::kDone;
      if (!done) {
        ++remaining;
        dependents_[dep].push_back(t.task_id);
      }
    }
    e.remaining = remaining;
    const std::uint64_t id = t.task_id;
    e.node = std::move(t);
    tasks_.emplace(id, std::move(e));
    if (remaining == 0) to_ready.push_back(id);
  }
  for (std::uint64_t id : to_ready) make_ready(id);
}

void WrmState::make_ready(std::uint64_t id) {
  Entry& e = tasks_.at(id);
  e.state = TaskState::kReady;
  ready_fifo_.push_back(id);
  ready_sorted_.insert(ReadyKey{effective_speedup(e.node), e.seq, id});
}

void WrmState::start(std::uint64_t id) {
  Entry& e = tasks_.at(id);
  e.state = TaskState::kRunning;
  std::erase(ready_fifo_, id);
  ready_sorted_.erase(ReadyKey{effective_speedup(e.node), e.seq, id});
}

std::vector<std::uint64_t> WrmState::ready_ids() const {
  std::vector<std::uint64_t> out;
  if (opts_.scheduler == SchedulerKind::kFcfs) {
    out = ready_fifo_;
    return out;
  }
  // Descending speedup; stable insertion order among equal speedups.
  std::vector<ReadyKey> keys(ready_sorted_.begin(), ready_sorted_.end());
  std::stable_sort(keys.begin(), keys.end(),
                   [](const ReadyKey& a, const ReadyKey& b) {
                     return a.speedup > b.speedup;
                   });
  out.reserve(keys.size());
  for (const auto& key : keys) out.push_back(key.id);
  return out;
}

std::optional<std::uint64_t> WrmState::pick_plain(DeviceKind device) const {
  if (opts_.scheduler == SchedulerKind::kFcfs) {
    for (std::uint64_t id : ready_fifo_) {
      if (device_compatible(tasks_.at(id).node, device)) return id;
    }
    return std::nullopt;
  }
  if (device == DeviceKind::kCpu) {
    // Ascending (speedup, seq): the first compatible hit is the minimum
    // speedup with the earliest submission among equals.
    for (const auto& key : ready_sorted_) {
      if (device_compatible(tasks_.at(key.id).node, device)) return key.id;
    }
    return std::nullopt;
  }
  // Maximum speedup; within the winning speedup keep scanning (descending
  // iteration visits later submissions first) so ties resolve to the
  // earliest submission.
  std::optional<std::uint64_t> best;
  double best_speedup = 0.0;
  for (auto it = ready_sorted_.rbegin(); it != ready_sorted_.rend(); ++it) {
    if (best && it->speedup != best_speedup) break;
    if (!device_compatible(tasks_.at(it->id).node, device)) continue;
    best = it->id;
    best_speedup = it->speedup;
  }
  return best;
}

std::optional<std::uint64_t> WrmState::next(DeviceKind device) {
  auto id = pick_plain(device);
  if (id) start(*id);
  return id;
}

std::vector<std::uint64_t> WrmState::ready_reusers(
    DeviceKind device, std::uint64_t just_finished) const {
  std::vector<std::uint64_t> out;
  auto deps_it = dependents_.find(just_finished);
  if (deps_it == dependents_.end()) return out;
  const TaskNode& finished = entry(just_finished).node;
  for (std::uint64_t succ : deps_it->second) {
    const Entry& e = tasks_.at(succ);
    if (e.state != TaskState::kReady) continue;
    if (!device_compatible(e.node, device)) continue;
    if (reuse_bytes(finished, e.node) == 0) continue;
    out.push_back(succ);
  }
  return out;
}

std::optional<std::uint64_t> WrmState::next_dl(DeviceKind device,
                                               std::uint64_t just_finished) {
  if (!opts_.data_locality) return next(device);
  const std::vector<std::uint64_t> reusers =
      ready_reusers(device, just_finished);
  if (reusers.empty()) return next(device);
  const TaskNode& finished = entry(just_finished).node;

  if (opts_.scheduler == SchedulerKind::kFcfs) {
    // Earliest ready reuser in queue order.
    for (std::uint64_t id : ready_fifo_) {
      if (std::find(reusers.begin(), reusers.end(), id) != reusers.end()) {
        start(id);
        return id;
      }
    }
    return next(device);
  }

  // PATS: score reusers by reused volume first, then by the device's speedup
  // direction, then submission order.
  auto better = [&](std::uint64_t a, std::uint64_t b) {
    const Entry& ea = tasks_.at(a);
    const Entry& eb = tasks_.at(b);
    const std::uint64_t ra = reuse_bytes(finished, ea.node);
    const std::uint64_t rb = reuse_bytes(finished, eb.node);
    if (ra != rb) return ra > rb;
    const double sa = effective_speedup(ea.node);
    const double sb = effective_speedup(eb.node);
    if (sa != sb) {
      return device == DeviceKind::kGpu ? sa > sb : sa < sb;
    }
    return ea.seq < eb.seq;
  };
  std::uint64_t best_reuser = reusers.front();
  for (std::uint64_t id : reusers) {
    if (better(id, best_reuser)) best_reuser = id;
  }

  if (device == DeviceKind::kCpu) {
    start(best_reuser);
    return best_reuser;
  }

  // GPU gate: the reuser wins only when its speedup is within the transfer
  // impact of the best overall candidate.
  const auto plain = pick_plain(device);
  if (!plain) return std::nullopt;
  const Entry& q = tasks_.at(*plain);
  const double impact = q.node.transfer_impact.value_or(opts_.transfer_impact);
  const double s_d = effective_speedup(tasks_.at(best_reuser).node);
  const double s_q = effective_speedup(q.node);
  const std::uint64_t chosen =
      (s_d >= s_q * (1.0 - impact)) ? best_reuser : *plain;
  start(chosen);
  return chosen;
}

std::vector<std::uint64_t> WrmState::complete(std::uint64_t task_id) {
  auto it = tasks_.find(task_id);
  if (it == tasks_.end()) {
    throw ProtocolError("completing unknown task " + std::to_string(task_id));
  }
  if (it->second.state != TaskState::kRunning) {
    throw ProtocolError("completing a task that is not running: " +
                        std::to_string(task_id));
  }
  it->second.state = TaskState::kDone;

  // The dependents entry must outlive this call: reuse-conscious picks ask
  // for the finished task's successors after its completion is recorded.
  std::vector<std::uint64_t> newly_ready;
  auto deps_it = dependents_.find(task_id);
  if (deps_it != dependents_.end()) {
    for (std::uint64_t succ : deps_it->second) {
      Entry& e = tasks_.at(succ);
      if (e.state != TaskState::kPending) continue;
      if (--e.remaining == 0) newly_ready.push_back(succ);
    }
  }
  std::sort(newly_ready.begin(), newly_ready.end(),
            [&](std::uint64_t a, std::uint64_t b) {
              return tasks_.at(a).seq < tasks_.at(b).seq;
            });
  for (std::uint64_t id : newly_ready) make_ready(id);
  return newly_ready;
}

PrefetchTimeline prefetch_pipeline(std::span<const PrefetchTask> tasks,
                                   bool overlap) {
  for (const auto& t : tasks) {
    if (t.upload < 0 || t.compute < 0 || t.download < 0) {
      throw ConfigError("pipeline phase durations must be non-negative");
    }
  }
  PrefetchTimeline timeline;
  timeline.phases.reserve(tasks.size());
  double upload_free = 0.0;
  double compute_free = 0.0;
  double download_free = 0.0;
  for (const auto& t : tasks) {
    PrefetchPhase p;
    const double start = overlap ? upload_free : download_free;
    p.upload_start = start;
    p.upload_end = p.upload_start + t.upload;
    p.compute_start = overlap ? std::max(p.upload_end, compute_free)
                              : p.upload_end;
    p.compute_end = p.compute_start + t.compute;
    p.download_start = overlap ? std::max(p.compute_end, download_free)
                               : p.compute_end;
    p.download_end = p.download_start + t.download;
    upload_free = p.upload_end;
    compute_free = p.compute_end;
    download_free = p.download_end;
    timeline.phases.push_back(p);
    timeline.makespan = p.download_end;
  }
  return timeline;
}

}  // namespace rt
