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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <string>
#include <vector>

#include "rt/sim.hpp"

using namespace rt;
using namespace rt::sim;

namespace {

TaskTypeProfile cpu_unit_profile(const std::string& name) {
  TaskTypeProfile p;
  p.name = name;
  p.cost_mean = 1.0;
  p.cost_spread = 0.0;
  p.variants = TaskVariants::kCpuOnly;
  return p;
}

TaskTypeProfile dual_profile(const std::string& name, double speedup,
                             double cost_mean = 1.0, double spread = 0.0) {
  TaskTypeProfile p;
  p.name = name;
  p.cost_mean = cost_mean;
  p.cost_spread = spread;
  p.gpu_speedup = speedup;
  p.variants = TaskVariants::kBoth;
  return p;
}

/// One tile, one stage, n independent tasks of the given profile.
WorkloadSpec flat_spec(const TaskTypeProfile& profile, int n) {
  WorkloadSpec spec;
  spec.domain = BoundingBox{{0, 0}, {9, 9}};
  spec.tile_extent = {10, 10};
  spec.profiles = {profile};
  StageKindSpec stage;
  stage.kind = "work";
  stage.task_types.assign(std::size_t(n), profile.name);
  stage.graph = StageGraph::kParallel;
  spec.stage_kinds = {stage};
  return spec;
}

/// The two-population reference workload: per tile, one slow and one fast
/// dual-variant task, independent of each other.
WorkloadSpec bimodal_spec() {
  WorkloadSpec spec;
  spec.domain = BoundingBox{{0, 0}, {79, 59}};
  spec.tile_extent = {10, 10};  // 8 x 6 = 48 tiles
  spec.profiles = {dual_profile("slow", 1.2, 1.0, 0.2),
                   dual_profile("fast", 15.0, 1.0, 0.2)};
  StageKindSpec stage;
  stage.kind = "analysis";
  stage.task_types = {"slow", "fast"};
  stage.graph = StageGraph::kParallel;
  spec.stage_kinds = {stage};
  return spec;
}

std::string fresh_dir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() /
             ("rt_sim_" + tag + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

}  // namespace

// ---------------------------------------------------------------------------
// Workload generation

TEST_CASE("two-stage generation builds one instance per tile per stage") {
  WorkloadSpec spec;
  spec.domain = BoundingBox{{0, 0}, {99, 99}};
  spec.tile_extent = {50, 50};
  spec.profiles = {dual_profile("seg_op", 4.0), dual_profile("feat_op", 8.0)};
  spec.stage_kinds = {
      StageKindSpec{"segmentation", {"seg_op", "seg_op"}, StageGraph::kChain, {}},
      StageKindSpec{"features", {"feat_op"}, StageGraph::kChain, {}},
  };
  const Workload wl = generate_workload(spec, 7);

  CHECK(wl.tiles.size() == 4);
  CHECK(wl.stages.size() == 8);
  std::size_t edges = 0;
  for (const auto& s : wl.stages) edges += s.stage.deps.size();
  CHECK(edges == 4);  // each feature stage depends on its tile's segmentation
  CHECK(wl.task_count() == 4 * 2 + 4 * 1);

  // Feature stages read what segmentation wrote, tile by tile.
  for (const auto& s : wl.stages) {
    if (s.stage.stage_kind != "features") continue;
    REQUIRE(s.stage.deps.size() == 1);
    const auto& input = s.stage.region_descriptors.front();
    CHECK(input.id.type_tag == "segmentation");
    CHECK(input.io_mode == IoMode::kInput);
  }
}

TEST_CASE("explicit stage dependencies form arbitrary acyclic graphs") {
  WorkloadSpec spec;
  spec.domain = BoundingBox{{0, 0}, {19, 19}};
  spec.tile_extent = {10, 10};  // 4 tiles
  spec.profiles = {dual_profile("op", 4.0)};
  StageKindSpec seg{"segmentation", {"op"}, StageGraph::kChain, {}};
  StageKindSpec norm{"normalize", {"op"}, StageGraph::kChain, {}};
  norm.depends_on = std::vector<std::string>{};  // reads the source region
  StageKindSpec merge{"merge", {"op"}, StageGraph::kChain, {}};
  merge.depends_on = std::vector<std::string>{"segmentation", "normalize"};
  spec.stage_kinds = {seg, norm, merge};

  const Workload wl = generate_workload(spec, 3);
  REQUIRE(wl.stages.size() == 12);
  for (std::size_t tile = 0; tile < 4; ++tile) {
    const auto& s_seg = wl.stages[tile * 3 + 0];
    const auto& s_norm = wl.stages[tile * 3 + 1];
    const auto& s_merge = wl.stages[tile * 3 + 2];
    CHECK(s_seg.stage.deps.empty());
    CHECK(s_norm.stage.deps.empty());
    CHECK(s_norm.stage.region_descriptors.front().id.type_tag == "src");
    REQUIRE(s_merge.stage.deps.size() == 2);
    CHECK(s_merge.stage.deps.count(s_seg.stage.stage_id) == 1);
    CHECK(s_merge.stage.deps.count(s_norm.stage.stage_id) == 1);
    // Merge reads both upstream outputs plus writes its own region.
    REQUIRE(s_merge.stage.region_descriptors.size() == 3);
    CHECK(s_merge.stage.region_descriptors[0].id.type_tag == "segmentation");
    CHECK(s_merge.stage.region_descriptors[1].id.type_tag == "normalize");
    CHECK(s_merge.stage.region_descriptors[2].io_mode == IoMode::kOutput);
  }

  // The diamond executes end to end on a plain CPU node.
  std::vector<NodeSpec> nodes = {NodeSpec{2, 0, 0.0}};
  SimOptions opts;
  const RunMetrics m = run_sim(wl, nodes, opts);
  CHECK(m.stages_completed == 12);
  CHECK(m.tasks_total == 12);
}

TEST_CASE("cyclic stage dependencies are rejected with the cycle spelled out") {
  WorkloadSpec spec;
  spec.domain = BoundingBox{{0, 0}, {9, 9}};
  spec.tile_extent = {10, 10};
  spec.profiles = {dual_profile("op", 4.0)};
  StageKindSpec a{"alpha", {"op"}, StageGraph::kChain, {}};
  a.depends_on = std::vector<std::string>{"beta"};
  StageKindSpec b{"beta", {"op"}, StageGraph::kChain, {}};
  b.depends_on = std::vector<std::string>{"alpha"};
  spec.stage_kinds = {a, b};

  CHECK_THROWS_WITH_AS(spec.validate(),
                       "stage kind dependency cycle: alpha -> beta -> alpha",
                       CycleError);

  SUBCASE("unknown dependency names the kinds involved") {
    spec.stage_kinds[0].depends_on = std::vector<std::string>{"ghost"};
    spec.stage_kinds[1].depends_on.reset();
    CHECK_THROWS_WITH_AS(
        spec.validate(),
        "stage kind alpha depends on unknown stage kind ghost", ConfigError);
  }
}

TEST_CASE("workload generation is deterministic per seed") {
  const WorkloadSpec spec = bimodal_spec();
  const Workload a = generate_workload(spec, 42);
  const Workload b = generate_workload(spec, 42);
  const Workload c = generate_workload(spec, 43);
  REQUIRE(a.task_count() == b.task_count());
  bool all_equal = true;
  bool any_differs_from_c = false;
  for (std::size_t i = 0; i < a.stages.size(); ++i) {
    for (std::size_t j = 0; j < a.stages[i].tasks.size(); ++j) {
      const auto& ta = a.stages[i].tasks[j];
      const auto& tb = b.stages[i].tasks[j];
      const auto& tc = c.stages[i].tasks[j];
      if (ta.node.cost_cpu != tb.node.cost_cpu ||
          ta.node.task_id != tb.node.task_id) {
        all_equal = false;
      }
      if (ta.node.cost_cpu != tc.node.cost_cpu) any_differs_from_c = true;
    }
  }
  CHECK(all_equal);
  CHECK(any_differs_from_c);
}

TEST_CASE("workload validation rejects malformed specs") {
  WorkloadSpec spec = bimodal_spec();
  SUBCASE("no stage kinds") {
    spec.stage_kinds.clear();
    CHECK_THROWS_AS(generate_workload(spec, 1), ConfigError);
  }
  SUBCASE("unknown task type") {
    spec.stage_kinds[0].task_types.push_back("nonexistent");
    CHECK_THROWS_AS(generate_workload(spec, 1), ConfigError);
  }
  SUBCASE("non-positive cost") {
    spec.profiles[0].cost_mean = 0.0;
    CHECK_THROWS_AS(generate_workload(spec, 1), ConfigError);
  }
  SUBCASE("reserved stage kind name") {
    spec.stage_kinds[0].kind = "src";
    CHECK_THROWS_AS(generate_workload(spec, 1), ConfigError);
  }
  SUBCASE("estimate on a single-variant profile") {
    spec.profiles[0].variants = TaskVariants::kCpuOnly;
    spec.profiles[0].speedup_estimate = 3.0;
    CHECK_THROWS_AS(generate_workload(spec, 1), ConfigError);
  }
}

// ---------------------------------------------------------------------------
// Error injection

TEST_CASE("error injection splits profiles at the median estimate") {
  std::vector<TaskTypeProfile> profiles = {dual_profile("a", 2.0),
                                           dual_profile("b", 10.0)};
  SUBCASE("e=0 keeps every estimate") {
    const auto out = inject_error(profiles, 0.0);
    CHECK(out[0].estimate() == doctest::Approx(2.0));
    CHECK(out[1].estimate() == doctest::Approx(10.0));
  }
  SUBCASE("e=50 pulls both sides toward each other") {
    const auto out = inject_error(profiles, 50.0);
    CHECK(out[0].estimate() == doctest::Approx(3.0));
    CHECK(out[1].estimate() == doctest::Approx(5.0));
  }
  SUBCASE("e=100 doubles the low side and floors the high side") {
    const auto out = inject_error(profiles, 100.0);
    CHECK(out[0].estimate() == doctest::Approx(4.0));
    CHECK(out[1].estimate() == doctest::Approx(0.01));
  }
  SUBCASE("true speedups never move") {
    const auto out = inject_error(profiles, 80.0);
    CHECK(out[0].gpu_speedup == doctest::Approx(2.0));
    CHECK(out[1].gpu_speedup == doctest::Approx(10.0));
  }
  SUBCASE("range check") {
    CHECK_THROWS_AS(inject_error(profiles, -1.0), ConfigError);
    CHECK_THROWS_AS(inject_error(profiles, 100.5), ConfigError);
  }
  SUBCASE("exact-median and single-variant profiles are untouched") {
    profiles.push_back(dual_profile("mid", 6.0));  // equals the median of 3
    profiles.push_back(cpu_unit_profile("cpu_only"));
    const auto out = inject_error(profiles, 50.0);
    CHECK(out[2].estimate() == doctest::Approx(6.0));
    CHECK(!out[3].speedup_estimate.has_value());
  }
}

// ---------------------------------------------------------------------------
// Serial lower bounds

TEST_CASE("k independent unit tasks on one core take k time units") {
  const int k = 7;
  const Workload wl = generate_workload(flat_spec(cpu_unit_profile("u"), k), 1);
  SimOptions opts;
  const RunMetrics m = run_sim(wl, {NodeSpec{1, 0, 0.0}}, opts);
  CHECK(m.makespan == doctest::Approx(double(k)));
  CHECK(m.tasks_total == std::uint64_t(k));
  CHECK(m.tasks_on_gpu == 0);
  CHECK(m.stages_completed == 1);
}

TEST_CASE("two cores halve the unit-task makespan, rounded up") {
  const int k = 7;
  const Workload wl = generate_workload(flat_spec(cpu_unit_profile("u"), k), 1);
  SimOptions opts;
  const RunMetrics m = run_sim(wl, {NodeSpec{2, 0, 0.0}}, opts);
  CHECK(m.makespan == doctest::Approx(4.0));  // ceil(7 / 2)
}

TEST_CASE("busy time never exceeds makespan times slot count") {
  const Workload wl = generate_workload(bimodal_spec(), 5);
  SimOptions opts;
  opts.scheduler = SchedulerKind::kPats;
  const RunMetrics m = run_sim(wl, {NodeSpec{12, 3, 0.0}}, opts);
  CHECK(m.cpu_busy <= m.makespan * 12 + 1e-9);
  CHECK(m.gpu_busy <= m.makespan * 3 + 1e-9);
  CHECK(m.tasks_total == wl.task_count());
  CHECK(m.stages_completed == wl.stages.size());
}

// ---------------------------------------------------------------------------
// Scheduler trends

TEST_CASE("speedup-aware picks beat FCFS on the bimodal workload") {
  const std::vector<NodeSpec> nodes = {NodeSpec{12, 3, 0.0}};
  double total_improvement = 0.0;
  for (std::uint64_t seed = 100; seed < 110; ++seed) {
    const Workload wl = generate_workload(bimodal_spec(), seed);
    SimOptions pats;
    pats.scheduler = SchedulerKind::kPats;
    SimOptions fcfs;
    fcfs.scheduler = SchedulerKind::kFcfs;
    const double mp = run_sim(wl, nodes, pats).makespan;
    const double mf = run_sim(wl, nodes, fcfs).makespan;
    CHECK(mp <= mf + 1e-9);
    total_improvement += (mf - mp) / mf;
  }
  CHECK(total_improvement / 10.0 >= 0.10);
}

TEST_CASE("GPU task share shifts with injected estimate error") {
  WorkloadSpec spec = bimodal_spec();
  const std::vector<NodeSpec> nodes = {NodeSpec{12, 3, 0.0}};
  const std::vector<double> levels = {0.0, 100.0};
  SimOptions opts;
  opts.seed = 11;
  const auto rows = sweep_error(spec, nodes, opts, levels);
  REQUIRE(rows.size() == 2);
  // With exact estimates the GPUs run almost only the high-speedup type;
  // at e=100 the ordering flips and the slow type floods the GPUs.
  CHECK(rows[0].pats.gpu_fraction("fast") >
        rows[0].pats.gpu_fraction("slow"));
  CHECK(rows[1].pats.gpu_fraction("slow") >
        rows[1].pats.gpu_fraction("fast"));
}

TEST_CASE("sweep rejects an empty level list") {
  WorkloadSpec spec = bimodal_spec();
  SimOptions opts;
  CHECK_THROWS_AS(
      sweep_error(spec, {NodeSpec{1, 0, 0.0}}, opts, std::vector<double>{}),
      ConfigError);
}

// ---------------------------------------------------------------------------
// Data locality and prefetch

namespace {

/// Four tiles, each a chain of 8 GPU-capable tasks sharing the tile's data.
WorkloadSpec chained_reuse_spec() {
  WorkloadSpec spec;
  spec.domain = BoundingBox{{0, 0}, {19, 19}};
  spec.tile_extent = {10, 10};
  TaskTypeProfile op = dual_profile("op", 8.0, 1.0, 0.0);
  op.bytes_in = 1000;
  op.bytes_out = 1000;
  spec.profiles = {op};
  StageKindSpec stage;
  stage.kind = "proc";
  stage.task_types.assign(8, "op");
  stage.graph = StageGraph::kChain;
  spec.stage_kinds = {stage};
  return spec;
}

}  // namespace

TEST_CASE("data locality removes most transfers on chained reuse") {
  const Workload wl = generate_workload(chained_reuse_spec(), 3);
  const std::vector<NodeSpec> nodes = {NodeSpec{0, 1, 500.0}};
  SimOptions base;
  base.scheduler = SchedulerKind::kPats;
  SimOptions dl = base;
  dl.data_locality = true;

  const RunMetrics plain = run_sim(wl, nodes, base);
  const RunMetrics reused = run_sim(wl, nodes, dl);
  REQUIRE(plain.transfer_bytes > 0);
  CHECK(reused.transfer_bytes * 2 <= plain.transfer_bytes);
  CHECK(reused.makespan <=
        plain.makespan * (1.0 + base.transfer_impact) + 1e-9);
  CHECK(reused.makespan <= plain.makespan + 1e-9);
}

TEST_CASE("pipeline overlap matches the analytic formula on identical tasks") {
  // u = 1, c = 2, d = 0.5 per task, six independent tasks on one GPU.
  TaskTypeProfile op = dual_profile("op", 1.0, 2.0, 0.0);
  op.bytes_in = 10;
  op.bytes_out = 5;
  const int n = 6;
  const Workload wl = generate_workload(flat_spec(op, n), 1);
  const std::vector<NodeSpec> nodes = {NodeSpec{0, 1, 10.0}};

  SimOptions serial;
  const RunMetrics off = run_sim(wl, nodes, serial);
  CHECK(off.makespan == doctest::Approx(n * 3.5));

  SimOptions overlapped = serial;
  overlapped.prefetch = true;
  const RunMetrics on = run_sim(wl, nodes, overlapped);
  CHECK(on.makespan == doctest::Approx(1.0 + n * 2.0 + 0.5));
}

TEST_CASE("prefetch never slows a GPU-bound workload") {
  for (std::uint64_t seed = 30; seed < 40; ++seed) {
    TaskTypeProfile op = dual_profile("op", 4.0, 2.0, 0.5);
    op.bytes_in = 40;
    op.bytes_out = 20;
    const Workload wl = generate_workload(flat_spec(op, 12), seed);
    const std::vector<NodeSpec> nodes = {NodeSpec{0, 1, 20.0}};
    SimOptions off;
    SimOptions on;
    on.prefetch = true;
    CHECK(run_sim(wl, nodes, on).makespan <=
          run_sim(wl, nodes, off).makespan + 1e-9);
  }
}

// ---------------------------------------------------------------------------
// Determinism and order preservation

TEST_CASE("identical runs produce byte-identical traces") {
  const Workload wl = generate_workload(bimodal_spec(), 9);
  const std::vector<NodeSpec> nodes = {NodeSpec{4, 2, 100.0}};
  SimOptions opts;
  opts.scheduler = SchedulerKind::kPats;
  opts.data_locality = true;
  TraceLog t1;
  TraceLog t2;
  run_sim(wl, nodes, opts, &t1);
  run_sim(wl, nodes, opts, &t2);
  REQUIRE(!t1.records().empty());
  CHECK(t1.to_text() == t2.to_text());
}

TEST_CASE("order-preserving estimate error leaves the PATS trace unchanged") {
  WorkloadSpec spec;
  spec.domain = BoundingBox{{0, 0}, {39, 29}};
  spec.tile_extent = {10, 10};
  spec.profiles = {dual_profile("p1", 1.2), dual_profile("p2", 3.0),
                   dual_profile("p3", 9.0), dual_profile("p4", 15.0)};
  StageKindSpec stage;
  stage.kind = "mix";
  stage.task_types = {"p1", "p2", "p3", "p4"};
  stage.graph = StageGraph::kParallel;
  spec.stage_kinds = {stage};

  const std::vector<NodeSpec> nodes = {NodeSpec{4, 2, 0.0}};
  SimOptions opts;
  opts.scheduler = SchedulerKind::kPats;

  // e=10 keeps the estimate ordering (1.32 < 3.3 < 8.1 < 13.5), so the
  // decision sequence and therefore the trace must not move at all.
  TraceLog base;
  run_sim(generate_workload(spec, 21), nodes, opts, &base);
  WorkloadSpec perturbed = spec;
  perturbed.profiles = inject_error(spec.profiles, 10.0);
  TraceLog shifted;
  run_sim(generate_workload(perturbed, 21), nodes, opts, &shifted);
  CHECK(base.to_text() == shifted.to_text());

  // e=100 inverts the ordering and must change the schedule.
  WorkloadSpec inverted = spec;
  inverted.profiles = inject_error(spec.profiles, 100.0);
  TraceLog flipped;
  run_sim(generate_workload(inverted, 21), nodes, opts, &flipped);
  CHECK(base.to_text() != flipped.to_text());
}

// ---------------------------------------------------------------------------
// Disk-backed runs

TEST_CASE("the disk backend records write sessions for staged outputs") {
  WorkloadSpec spec = bimodal_spec();
  const Workload wl = generate_workload(spec, 2);
  std::vector<NodeSpec> nodes(4, NodeSpec{2, 0, 0.0});
  SimOptions opts;
  opts.storage = SimStorage::kDisk;
  opts.io_group.placement = IoPlacement::kCoLocated;
  opts.io_group.group_size = 2;
  opts.io_group.io_node_count = 4;
  opts.io_group.queue_threshold = 3;
  opts.io_group.directory = fresh_dir("sessions");
  const RunMetrics m = run_sim(wl, nodes, opts);
  CHECK(m.stages_completed == wl.stages.size());
  CHECK(m.write_sessions > 0);
}

TEST_CASE("node validation rejects bad shapes") {
  const Workload wl = generate_workload(flat_spec(cpu_unit_profile("u"), 2), 1);
  SimOptions opts;
  CHECK_THROWS_AS(run_sim(wl, {NodeSpec{-1, 0, 0.0}}, opts), ConfigError);
  CHECK_THROWS_AS(run_sim(wl, {NodeSpec{0, 0, 0.0}}, opts), ConfigError);
  CHECK_THROWS_AS(run_sim(wl, {}, opts), ConfigError);
}
