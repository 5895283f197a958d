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

// rtsim: command-line driver for the workload simulator.
//
//   rtsim run      --config cfg.json   execute one workload, write metrics+trace
//   rtsim sweep    --config cfg.json --sweep-errors 0,50,100
//                                      one metrics row per (error, scheduler)
//   rtsim sweep    --config cfg.json --sweep-groups 1,15,all
//                                      one metrics row per I/O group size
//   rtsim validate --config cfg.json   parse and check, print normalized config
//
// Flag > environment > config-file precedence for seed, scheduler, storage
// backend, and output directory. Environment variables: RTSIM_SEED,
// RTSIM_SCHEDULER, RTSIM_STORAGE, RTSIM_OUT_DIR.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rt/disk_store.hpp"
#include "rt/error.hpp"
#include "rt/sim.hpp"
#include "rt/trace.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using rt::ConfigError;
using rt::IoDistribution;
using rt::IoGroupConfig;
using rt::IoPlacement;
using rt::SchedulerKind;
using rt::TaskVariants;

constexpr int kSchemaVersion = 1;

// ---------------------------------------------------------------------------
// Small helpers

json load_json_file(const fs::path& path, const std::string& what) {
  if (!fs::exists(path)) {
    throw ConfigError(what + " file " + path.string() + " does not exist");
  }
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + what + " file " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(what + " file " + path.string() + ": " + e.what());
  }
}

/// Fetches a required field, naming the file and key on failure.
template <typename T>
T field(const json& j, const std::string& key, const fs::path& file) {
  if (!j.contains(key)) {
    throw ConfigError(file.string() + ": missing field '" + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(file.string() + ": field '" + key + "' has the wrong type");
  }
}

template <typename T>
T field_or(const json& j, const std::string& key, T def, const fs::path& file) {
  if (!j.contains(key)) return def;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(file.string() + ": field '" + key + "' has the wrong type");
  }
}

void check_schema_version(const json& j, const fs::path& file) {
  const int v = field<int>(j, "schema_version", file);
  if (v != kSchemaVersion) {
    throw ConfigError(file.string() + ": unsupported schema_version " +
                      std::to_string(v) + " (this build reads version " +
                      std::to_string(kSchemaVersion) + ")");
  }
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : text) {
    if (c == ',') {
      if (!cur.empty()) parts.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      cur += c;
    }
  }
  if (!cur.empty()) parts.push_back(cur);
  return parts;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

/// Writes via a temp file and renames so a crash never leaves a file that
/// looks complete.
void write_text_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw rt::IoError("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw rt::IoError("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// Enum spellings

SchedulerKind parse_scheduler(const std::string& s) {
  if (s == "fcfs") return SchedulerKind::kFcfs;
  if (s == "pats") return SchedulerKind::kPats;
  throw ConfigError("unknown scheduler '" + s + "' (expected fcfs or pats)");
}
std::string scheduler_name(SchedulerKind k) {
  return k == SchedulerKind::kPats ? "pats" : "fcfs";
}

rt::sim::SimStorage parse_storage(const std::string& s) {
  if (s == "dms") return rt::sim::SimStorage::kDms;
  if (s == "disk") return rt::sim::SimStorage::kDisk;
  throw ConfigError("unknown storage backend '" + s + "' (expected dms or disk)");
}
std::string storage_name(rt::sim::SimStorage s) {
  return s == rt::sim::SimStorage::kDms ? "dms" : "disk";
}

TaskVariants parse_variants(const std::string& s) {
  if (s == "cpu") return TaskVariants::kCpuOnly;
  if (s == "gpu") return TaskVariants::kGpuOnly;
  if (s == "both") return TaskVariants::kBoth;
  throw ConfigError("unknown variants '" + s + "' (expected cpu, gpu, or both)");
}
std::string variants_name(TaskVariants v) {
  switch (v) {
    case TaskVariants::kCpuOnly: return "cpu";
    case TaskVariants::kGpuOnly: return "gpu";
    default: return "both";
  }
}

rt::sim::StageGraph parse_graph(const std::string& s) {
  if (s == "chain") return rt::sim::StageGraph::kChain;
  if (s == "parallel") return rt::sim::StageGraph::kParallel;
  throw ConfigError("unknown graph '" + s + "' (expected chain or parallel)");
}
std::string graph_name(rt::sim::StageGraph g) {
  return g == rt::sim::StageGraph::kChain ? "chain" : "parallel";
}

IoPlacement parse_placement(const std::string& s) {
  if (s == "colocated") return IoPlacement::kCoLocated;
  if (s == "separated") return IoPlacement::kSeparated;
  throw ConfigError("unknown placement '" + s +
                    "' (expected colocated or separated)");
}
std::string placement_name(IoPlacement p) {
  return p == IoPlacement::kCoLocated ? "colocated" : "separated";
}

IoDistribution parse_distribution(const std::string& s) {
  if (s == "round_robin") return IoDistribution::kRoundRobin;
  if (s == "random") return IoDistribution::kRandom;
  throw ConfigError("unknown distribution '" + s +
                    "' (expected round_robin or random)");
}
std::string distribution_name(IoDistribution d) {
  return d == IoDistribution::kRoundRobin ? "round_robin" : "random";
}

// ---------------------------------------------------------------------------
// Config loading

/// Values that outrank the config file: environment first, flags on top.
struct Overrides {
  std::optional<std::string> seed;
  std::optional<std::string> scheduler;
  std::optional<std::string> storage;
  std::optional<std::string> out_dir;
};

std::optional<std::string> env_value(const char* name) {
  const char* v = std::getenv(name);
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::string(v);
}

Overrides env_overrides() {
  Overrides ov;
  ov.seed = env_value("RTSIM_SEED");
  ov.scheduler = env_value("RTSIM_SCHEDULER");
  ov.storage = env_value("RTSIM_STORAGE");
  ov.out_dir = env_value("RTSIM_OUT_DIR");
  return ov;
}

struct RunConfig {
  fs::path config_path;
  fs::path workload_path;
  fs::path nodes_path;
  SchedulerKind scheduler = SchedulerKind::kFcfs;
  bool data_locality = false;
  bool prefetch = false;
  rt::sim::SimStorage storage = rt::sim::SimStorage::kDms;
  int dms_shards = 4;
  IoGroupConfig io_group;
  double io_bandwidth = 0.0;
  double transfer_impact = 0.12;
  int worker_window = 0;
  std::uint64_t seed = 1;
  fs::path out_dir = "out";
  rt::sim::WorkloadSpec workload;
  std::vector<rt::sim::NodeSpec> nodes;
};

rt::sim::WorkloadSpec load_workload(const fs::path& path) {
  const json j = load_json_file(path, "workload");
  check_schema_version(j, path);
  rt::sim::WorkloadSpec spec;

  const json dom = field<json>(j, "domain", path);
  const auto lo = field<std::vector<std::int64_t>>(dom, "lo", path);
  const auto hi = field<std::vector<std::int64_t>>(dom, "hi", path);
  if (lo.size() != hi.size() || lo.empty() || lo.size() > 4) {
    throw ConfigError(path.string() + ": domain lo/hi must share a length in 1..4");
  }
  spec.domain = rt::BoundingBox(int(lo.size()), lo.data(), hi.data());
  spec.tile_extent = field<std::vector<std::int64_t>>(j, "tile_extent", path);

  for (const json& p : field<json>(j, "task_types", path)) {
    rt::sim::TaskTypeProfile prof;
    prof.name = field<std::string>(p, "name", path);
    prof.cost_mean = field_or<double>(p, "cost_mean", 1.0, path);
    prof.cost_spread = field_or<double>(p, "cost_spread", 0.0, path);
    prof.gpu_speedup = field_or<double>(p, "gpu_speedup", 1.0, path);
    prof.variants =
        parse_variants(field_or<std::string>(p, "variants", "both", path));
    if (p.contains("speedup_estimate")) {
      prof.speedup_estimate = field<double>(p, "speedup_estimate", path);
    }
    prof.bytes_in = field_or<std::uint64_t>(p, "bytes_in", 0, path);
    prof.bytes_out = field_or<std::uint64_t>(p, "bytes_out", 0, path);
    spec.profiles.push_back(std::move(prof));
  }

  for (const json& s : field<json>(j, "stages", path)) {
    rt::sim::StageKindSpec kind;
    kind.kind = field<std::string>(s, "kind", path);
    kind.task_types = field<std::vector<std::string>>(s, "task_types", path);
    kind.graph = parse_graph(field_or<std::string>(s, "graph", "chain", path));
    if (s.contains("depends_on")) {
      kind.depends_on = field<std::vector<std::string>>(s, "depends_on", path);
    }
    spec.stage_kinds.push_back(std::move(kind));
  }
  return spec;
}

std::vector<rt::sim::NodeSpec> load_nodes(const fs::path& path) {
  const json j = load_json_file(path, "node spec");
  check_schema_version(j, path);
  std::vector<rt::sim::NodeSpec> nodes;
  for (const json& n : field<json>(j, "nodes", path)) {
    rt::sim::NodeSpec spec;
    spec.cpu_cores = field_or<int>(n, "cpu_cores", 1, path);
    spec.gpus = field_or<int>(n, "gpus", 0, path);
    spec.gpu_transfer_bandwidth =
        field_or<double>(n, "gpu_transfer_bandwidth", 0.0, path);
    nodes.push_back(spec);
  }
  return nodes;
}

RunConfig load_run_config(const std::string& config_arg, const Overrides& ov) {
  RunConfig cfg;
  cfg.config_path = fs::path(config_arg);
  const json j = load_json_file(cfg.config_path, "config");
  check_schema_version(j, cfg.config_path);
  const fs::path base = cfg.config_path.has_parent_path()
                            ? cfg.config_path.parent_path()
                            : fs::path(".");

  cfg.workload_path = base / field<std::string>(j, "workload", cfg.config_path);
  cfg.nodes_path = base / field<std::string>(j, "nodes", cfg.config_path);

  std::string scheduler =
      field_or<std::string>(j, "scheduler", "fcfs", cfg.config_path);
  if (ov.scheduler) scheduler = *ov.scheduler;
  cfg.scheduler = parse_scheduler(scheduler);

  cfg.data_locality =
      field_or<bool>(j, "data_locality", false, cfg.config_path);
  cfg.prefetch = field_or<bool>(j, "prefetch", false, cfg.config_path);

  std::string storage = "dms";
  if (j.contains("storage")) {
    const json st = j.at("storage");
    storage = field_or<std::string>(st, "backend", "dms", cfg.config_path);
    cfg.dms_shards = field_or<int>(st, "shard_count", 4, cfg.config_path);
    cfg.io_group.placement = parse_placement(
        field_or<std::string>(st, "placement", "colocated", cfg.config_path));
    cfg.io_group.group_size =
        field_or<int>(st, "group_size", 0, cfg.config_path);
    // 0 = one I/O queue per compute node.
    cfg.io_group.io_node_count =
        field_or<int>(st, "io_nodes", 0, cfg.config_path);
    cfg.io_group.queue_threshold =
        field_or<int>(st, "queue_threshold", 1, cfg.config_path);
    cfg.io_group.distribution = parse_distribution(field_or<std::string>(
        st, "distribution", "round_robin", cfg.config_path));
    cfg.io_group.random_seed =
        field_or<std::uint64_t>(st, "random_seed", 0, cfg.config_path);
    cfg.io_group.directory =
        field_or<std::string>(st, "directory", "", cfg.config_path);
    cfg.io_group.disk_bandwidth =
        field_or<double>(st, "disk_bandwidth", 0.0, cfg.config_path);
    cfg.io_group.session_overhead =
        field_or<double>(st, "session_overhead", 0.0, cfg.config_path);
  }
  if (ov.storage) storage = *ov.storage;
  cfg.storage = parse_storage(storage);

  cfg.io_bandwidth = field_or<double>(j, "io_bandwidth", 0.0, cfg.config_path);
  cfg.transfer_impact =
      field_or<double>(j, "transfer_impact", 0.12, cfg.config_path);
  cfg.worker_window = field_or<int>(j, "worker_window", 0, cfg.config_path);

  std::uint64_t seed = field_or<std::uint64_t>(j, "seed", 1, cfg.config_path);
  if (ov.seed) {
    try {
      std::size_t used = 0;
      seed = std::stoull(*ov.seed, &used);
      if (used != ov.seed->size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ConfigError("seed must be a non-negative integer, got '" +
                        *ov.seed + "'");
    }
  }
  cfg.seed = seed;

  std::string out_dir = field_or<std::string>(j, "out_dir", "out", cfg.config_path);
  if (ov.out_dir) out_dir = *ov.out_dir;
  cfg.out_dir = fs::path(out_dir);

  cfg.workload = load_workload(cfg.workload_path);
  cfg.nodes = load_nodes(cfg.nodes_path);
  return cfg;
}

/// Full structural + semantic validation, shared by validate and the run
/// paths (run_sim revalidates internally; failing early gives file-level
/// messages).
void validate_config(const RunConfig& cfg) {
  cfg.workload.validate();
  if (cfg.nodes.empty()) {
    throw ConfigError(cfg.nodes_path.string() + ": node list is empty");
  }
  for (const auto& n : cfg.nodes) n.validate();
  if (cfg.storage == rt::sim::SimStorage::kDms) {
    if (cfg.dms_shards < 1) throw ConfigError("shard_count must be >= 1");
  } else {
    IoGroupConfig probe = cfg.io_group;
    if (probe.io_node_count <= 0) probe.io_node_count = int(cfg.nodes.size());
    if (probe.directory.empty()) probe.directory = "unset";
    probe.validate();
  }
  if (cfg.transfer_impact < 0.0 || cfg.transfer_impact >= 1.0) {
    throw ConfigError("transfer_impact must lie in [0, 1)");
  }
}

json normalized_config(const RunConfig& cfg) {
  json st;
  st["backend"] = storage_name(cfg.storage);
  if (cfg.storage == rt::sim::SimStorage::kDms) {
    st["shard_count"] = cfg.dms_shards;
  } else {
    st["placement"] = placement_name(cfg.io_group.placement);
    st["group_size"] = cfg.io_group.group_size;
    st["io_nodes"] = cfg.io_group.io_node_count;
    st["queue_threshold"] = cfg.io_group.queue_threshold;
    st["distribution"] = distribution_name(cfg.io_group.distribution);
    st["random_seed"] = cfg.io_group.random_seed;
    st["directory"] = cfg.io_group.directory;
    st["disk_bandwidth"] = cfg.io_group.disk_bandwidth;
    st["session_overhead"] = cfg.io_group.session_overhead;
  }

  json wl;
  wl["path"] = fs::weakly_canonical(cfg.workload_path).string();
  wl["task_types"] = json::array();
  for (const auto& p : cfg.workload.profiles) {
    json tp;
    tp["name"] = p.name;
    tp["cost_mean"] = p.cost_mean;
    tp["cost_spread"] = p.cost_spread;
    tp["gpu_speedup"] = p.gpu_speedup;
    tp["variants"] = variants_name(p.variants);
    tp["speedup_estimate"] = p.estimate();
    tp["bytes_in"] = p.bytes_in;
    tp["bytes_out"] = p.bytes_out;
    wl["task_types"].push_back(tp);
  }
  wl["stages"] = json::array();
  for (const auto& s : cfg.workload.stage_kinds) {
    json sk;
    sk["kind"] = s.kind;
    sk["task_types"] = s.task_types;
    sk["graph"] = graph_name(s.graph);
    if (s.depends_on) sk["depends_on"] = *s.depends_on;
    wl["stages"].push_back(sk);
  }

  json nodes = json::array();
  for (const auto& n : cfg.nodes) {
    json nd;
    nd["cpu_cores"] = n.cpu_cores;
    nd["gpus"] = n.gpus;
    nd["gpu_transfer_bandwidth"] = n.gpu_transfer_bandwidth;
    nodes.push_back(nd);
  }

  json out;
  out["schema_version"] = kSchemaVersion;
  out["scheduler"] = scheduler_name(cfg.scheduler);
  out["data_locality"] = cfg.data_locality;
  out["prefetch"] = cfg.prefetch;
  out["storage"] = st;
  out["io_bandwidth"] = cfg.io_bandwidth;
  out["transfer_impact"] = cfg.transfer_impact;
  out["worker_window"] = cfg.worker_window;
  out["seed"] = cfg.seed;
  out["out_dir"] = cfg.out_dir.string();
  out["workload"] = wl;
  out["nodes_path"] = fs::weakly_canonical(cfg.nodes_path).string();
  out["nodes"] = nodes;
  return out;
}

// ---------------------------------------------------------------------------
// Metrics CSV

const char* kCsvHeader =
    "schema_version,command,scheduler,storage,error_pct,group_size,seed,"
    "makespan,cpu_busy,gpu_busy,transfer_bytes,tasks_total,tasks_on_gpu,"
    "write_sessions,stages_completed\n";

std::string csv_row(const std::string& command, const std::string& scheduler,
                    const std::string& storage, const std::string& error_pct,
                    const std::string& group_size, std::uint64_t seed,
                    const rt::sim::RunMetrics& m) {
  std::ostringstream row;
  row << kSchemaVersion << ',' << command << ',' << scheduler << ',' << storage
      << ',' << error_pct << ',' << group_size << ',' << seed << ','
      << format_double(m.makespan) << ',' << format_double(m.cpu_busy) << ','
      << format_double(m.gpu_busy) << ',' << m.transfer_bytes << ','
      << m.tasks_total << ',' << m.tasks_on_gpu << ',' << m.write_sessions
      << ',' << m.stages_completed << '\n';
  return row.str();
}

rt::sim::SimOptions sim_options(const RunConfig& cfg) {
  rt::sim::SimOptions opts;
  opts.scheduler = cfg.scheduler;
  opts.data_locality = cfg.data_locality;
  opts.prefetch = cfg.prefetch;
  opts.storage = cfg.storage;
  opts.dms_shards = cfg.dms_shards;
  opts.io_group = cfg.io_group;
  opts.io_bandwidth = cfg.io_bandwidth;
  opts.worker_window = cfg.worker_window;
  opts.transfer_impact = cfg.transfer_impact;
  opts.seed = cfg.seed;
  return opts;
}

// ---------------------------------------------------------------------------
// Subcommands

int cmd_run(RunConfig cfg) {
  validate_config(cfg);
  fs::create_directories(cfg.out_dir);
  rt::sim::SimOptions opts = sim_options(cfg);
  if (cfg.storage == rt::sim::SimStorage::kDisk &&
      opts.io_group.directory.empty()) {
    opts.io_group.directory = (cfg.out_dir / "disk").string();
  }

  const rt::sim::Workload wl = rt::sim::generate_workload(cfg.workload, cfg.seed);
  rt::TraceLog trace;
  const rt::sim::RunMetrics m = rt::sim::run_sim(wl, cfg.nodes, opts, &trace);

  std::string csv = kCsvHeader;
  csv += csv_row("run", scheduler_name(cfg.scheduler),
                 storage_name(cfg.storage), "", "", cfg.seed, m);
  write_text_atomic(cfg.out_dir / "metrics.csv", csv);
  write_text_atomic(cfg.out_dir / "trace.txt", trace.to_text());

  std::cout << "run complete: makespan " << format_double(m.makespan)
            << ", tasks " << m.tasks_total << " (" << m.tasks_on_gpu
            << " on gpu), transfer_bytes " << m.transfer_bytes << "\n"
            << "wrote " << (cfg.out_dir / "metrics.csv").string() << " and "
            << (cfg.out_dir / "trace.txt").string() << "\n";
  return 0;
}

int cmd_sweep_errors(const RunConfig& cfg, const std::string& list) {
  const std::vector<std::string> tokens = split_list(list);
  if (tokens.empty()) throw ConfigError("sweep list is empty");
  std::vector<double> errors;
  for (const auto& t : tokens) {
    try {
      std::size_t used = 0;
      errors.push_back(std::stod(t, &used));
      if (used != t.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ConfigError("bad error percentage '" + t + "' in sweep list");
    }
  }

  validate_config(cfg);
  fs::create_directories(cfg.out_dir);
  rt::sim::SimOptions opts = sim_options(cfg);
  if (cfg.storage == rt::sim::SimStorage::kDisk &&
      opts.io_group.directory.empty()) {
    opts.io_group.directory = (cfg.out_dir / "disk").string();
  }

  const auto rows = rt::sim::sweep_error(cfg.workload, cfg.nodes, opts, errors);
  std::string csv = kCsvHeader;
  for (const auto& row : rows) {
    const std::string e = format_double(row.error_pct);
    csv += csv_row("sweep-errors", "pats", storage_name(cfg.storage), e, "",
                   cfg.seed, row.pats);
    csv += csv_row("sweep-errors", "fcfs", storage_name(cfg.storage), e, "",
                   cfg.seed, row.fcfs);
  }
  write_text_atomic(cfg.out_dir / "metrics.csv", csv);
  std::cout << "sweep complete: " << 2 * rows.size() << " rows\n"
            << "wrote " << (cfg.out_dir / "metrics.csv").string() << "\n";
  return 0;
}

int cmd_sweep_groups(const RunConfig& cfg, const std::string& list) {
  const std::vector<std::string> tokens = split_list(list);
  if (tokens.empty()) throw ConfigError("sweep list is empty");
  if (cfg.storage != rt::sim::SimStorage::kDisk) {
    throw ConfigError("group sweeps need the disk backend (storage=disk)");
  }
  struct GroupChoice {
    std::string label;
    int size = 0;
  };
  std::vector<GroupChoice> groups;
  for (const auto& t : tokens) {
    if (t == "all" || t == "ALL" || t == "0") {
      groups.push_back({"all", 0});
      continue;
    }
    try {
      std::size_t used = 0;
      const int size = std::stoi(t, &used);
      if (used != t.size() || size < 1) throw std::invalid_argument("range");
      groups.push_back({t, size});
    } catch (const std::exception&) {
      throw ConfigError("bad group size '" + t +
                        "' in sweep list (expected a positive integer or all)");
    }
  }

  validate_config(cfg);
  fs::create_directories(cfg.out_dir);
  const rt::sim::Workload wl = rt::sim::generate_workload(cfg.workload, cfg.seed);

  std::string csv = kCsvHeader;
  for (const auto& g : groups) {
    rt::sim::SimOptions opts = sim_options(cfg);
    opts.io_group.group_size = g.size;
    // Each combination writes into its own directory: session files from one
    // run must not satisfy reads in the next.
    opts.io_group.directory = (cfg.out_dir / ("disk_g" + g.label)).string();
    opts.io_group.validate();
    const rt::sim::RunMetrics m = rt::sim::run_sim(wl, cfg.nodes, opts);
    csv += csv_row("sweep-groups", scheduler_name(cfg.scheduler), "disk", "",
                   g.label, cfg.seed, m);
  }
  write_text_atomic(cfg.out_dir / "metrics.csv", csv);
  std::cout << "sweep complete: " << groups.size() << " rows\n"
            << "wrote " << (cfg.out_dir / "metrics.csv").string() << "\n";
  return 0;
}

int cmd_validate(const RunConfig& cfg) {
  validate_config(cfg);
  std::cout << normalized_config(cfg).dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"region runtime workload simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string seed_flag, scheduler_flag, storage_flag, out_dir_flag;
  std::string sweep_errors_flag, sweep_groups_flag;
  bool seed_set = false, scheduler_set = false, storage_set = false,
       out_dir_set = false, sweep_errors_set = false, sweep_groups_set = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "run config JSON file")
        ->required();
    sub->add_option("--seed", seed_flag, "override the config seed")
        ->each([&](const std::string&) { seed_set = true; });
    sub->add_option("--scheduler", scheduler_flag, "fcfs or pats")
        ->each([&](const std::string&) { scheduler_set = true; });
    sub->add_option("--storage", storage_flag, "dms or disk")
        ->each([&](const std::string&) { storage_set = true; });
    sub->add_option("--out-dir", out_dir_flag, "output directory")
        ->each([&](const std::string&) { out_dir_set = true; });
  };

  CLI::App* run = app.add_subcommand(
      "run", "execute one workload; write metrics.csv and trace.txt");
  add_common(run);

  CLI::App* sweep = app.add_subcommand(
      "sweep", "run a parameter sweep; one metrics row per combination");
  add_common(sweep);
  sweep
      ->add_option("--sweep-errors", sweep_errors_flag,
                   "comma-separated speedup-estimate error percentages; each "
                   "runs pats and fcfs")
      ->each([&](const std::string&) { sweep_errors_set = true; });
  sweep
      ->add_option("--sweep-groups", sweep_groups_flag,
                   "comma-separated I/O group sizes (integers or all)")
      ->each([&](const std::string&) { sweep_groups_set = true; });

  CLI::App* validate = app.add_subcommand(
      "validate", "parse and check a config; print the normalized form");
  add_common(validate);

  CLI11_PARSE(app, argc, argv);

  try {
    Overrides ov = env_overrides();
    if (seed_set) ov.seed = seed_flag;
    if (scheduler_set) ov.scheduler = scheduler_flag;
    if (storage_set) ov.storage = storage_flag;
    if (out_dir_set) ov.out_dir = out_dir_flag;

    const RunConfig cfg = load_run_config(config_path, ov);
    if (run->parsed()) return cmd_run(cfg);
    if (sweep->parsed()) {
      if (sweep_errors_set == sweep_groups_set) {
        throw ConfigError(
            "sweep needs exactly one of --sweep-errors or --sweep-groups");
      }
      return sweep_errors_set ? cmd_sweep_errors(cfg, sweep_errors_flag)
                              : cmd_sweep_groups(cfg, sweep_groups_flag);
    }
    return cmd_validate(cfg);
  } catch (const std::exception& e) {
    std::cerr << "rtsim: " << e.what() << "\n";
    return 1;
  }
}
