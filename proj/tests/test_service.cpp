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

#include <sys/socket.h>
#include <unistd.h>

#include <filesystem>
#include <random>
#include <set>

#include "rt/disk_store.hpp"
#include "rt/dms.hpp"
#include "rt/service.hpp"
#include "storage_oracle.hpp"

using namespace rt;

namespace {

BoundingBox box2(std::int64_t l0, std::int64_t l1, std::int64_t h0,
                 std::int64_t h1) {
  return BoundingBox{{l0, l1}, {h0, h1}};
}

DataRegionId rid(std::string key, std::int64_t ts = 0) {
  return DataRegionId{"img", std::move(key), "raw", ts, 0};
}

DataRegion filled_region(DataRegionId id, BoundingBox box,
                         std::uint8_t value) {
  DataRegion r(std::move(id), RegionKind::kDense2D, ElementKind::kU8, box);
  r.put_chunk(box, std::vector<std::uint8_t>(std::size_t(box.volume()),
                                             value));
  return r;
}

/// 64x64 element domain over an 8x8 cell grid (cells of 8x8 elements).
DmsConfig small_dms_config(int shards) {
  DmsConfig cfg;
  cfg.hilbert = sfc::HilbertParams{2, 3};
  cfg.grid_origin = {0, 0};
  cfg.cell_extent = {8, 8};
  cfg.occupied = {box2(0, 0, 7, 7)};
  cfg.shard_count = shards;
  return cfg;
}

std::string fresh_dir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() /
             ("rt_service_" + tag + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

std::set<int> payload_shards_of(const DmsServiceCluster& cluster,
                                const DataRegionId& id) {
  std::set<int> out;
  for (int s = 0; s < cluster.shard_count(); ++s) {
    for (const auto& [key, chunk] : cluster.server(s).snapshot().data_store) {
      if (key.first == id) {
        out.insert(s);
        break;
      }
    }
  }
  return out;
}

std::set<int> metadata_shards_of(const DmsServiceCluster& cluster,
                                 const DataRegionId& id) {
  std::set<int> out;
  for (int s = 0; s < cluster.shard_count(); ++s) {
    for (const auto& [iv, chunk_map] :
         cluster.server(s).snapshot().metadata_index) {
      for (const auto& [key, meta] : chunk_map) {
        if (key.first == id) {
          out.insert(s);
          break;
        }
      }
    }
  }
  return out;
}

}  // namespace

TEST_CASE("message framing round-trips over a socket pair") {
  int fds[2];
  REQUIRE(::socketpair(AF_UNIX, SOCK_STREAM, 0, fds) == 0);

  std::vector<std::uint8_t> body{1, 2, 3, 250, 0, 77};
  send_message(fds[0], MessageType::kStage, body);
  send_message(fds[0], MessageType::kAck, {});
  std::vector<std::uint8_t> big(100000);
  for (std::size_t i = 0; i < big.size(); ++i) big[i] = std::uint8_t(i * 7);
  send_message(fds[0], MessageType::kData, big);

  Message m1 = recv_message(fds[1]);
  CHECK(m1.type == MessageType::kStage);
  CHECK(m1.body == body);
  Message m2 = recv_message(fds[1]);
  CHECK(m2.type == MessageType::kAck);
  CHECK(m2.body.empty());
  Message m3 = recv_message(fds[1]);
  CHECK(m3.type == MessageType::kData);
  CHECK(m3.body == big);

  SUBCASE("orderly shutdown at a frame boundary reads as end of stream") {
    ::shutdown(fds[0], SHUT_WR);
    CHECK(!recv_message_opt(fds[1]).has_value());
    CHECK_THROWS_AS(recv_message(fds[1]), IoError);
  }
  SUBCASE("unknown type byte is a protocol error") {
    const std::uint8_t bad[5] = {0, 0, 0, 0, 99};
    CHECK(::send(fds[0], bad, sizeof(bad), 0) == 5);
    CHECK_THROWS_AS(recv_message(fds[1]), ProtocolError);
  }
  SUBCASE("truncated frame is an io error") {
    const std::uint8_t partial[3] = {42, 0, 0};
    CHECK(::send(fds[0], partial, sizeof(partial), 0) == 3);
    ::shutdown(fds[0], SHUT_WR);
    CHECK_THROWS_AS(recv_message(fds[1]), IoError);
  }

  ::close(fds[0]);
  ::close(fds[1]);
}

TEST_CASE("wire error codes map back to the original exception types") {
  CHECK(wire_error_code(NotFoundError("x")) == WireErrorCode::kNotFound);
  CHECK(wire_error_code(NotOccupiedError("x")) == WireErrorCode::kNotOccupied);
  CHECK(wire_error_code(RangeError("x")) == WireErrorCode::kRange);
  CHECK(wire_error_code(DecodeError("x")) == WireErrorCode::kDecode);
  CHECK(wire_error_code(ProtocolError("x")) == WireErrorCode::kProtocol);
  CHECK(wire_error_code(ConfigError("x")) == WireErrorCode::kConfig);
  CHECK(wire_error_code(IoError("x")) == WireErrorCode::kIo);
  CHECK_THROWS_AS(throw_wire_error(WireErrorCode::kNotFound, "m"),
                  NotFoundError);
  CHECK_THROWS_AS(throw_wire_error(WireErrorCode::kNotOccupied, "m"),
                  NotOccupiedError);
  CHECK_THROWS_AS(throw_wire_error(WireErrorCode::kGeneric, "m"), Error);
}

TEST_CASE("shard cluster serves staged data back byte-exact") {
  auto seq = std::make_shared<SequenceCounter>(0);
  DmsServiceCluster cluster("dms_svc", small_dms_config(4), seq);
  auto& store = cluster.store();

  auto region = filled_region(rid("a"), box2(0, 0, 15, 15), 42);
  store.stage_region(region, 2).wait();

  DataRegion back = store.read_region(rid("a"), box2(0, 0, 15, 15));
  CHECK(back.chunks().begin()->second.payload ==
        region.chunks().begin()->second.payload);

  DataRegion corner = store.read_region(rid("a"), box2(4, 4, 11, 11));
  CHECK(corner.chunks().begin()->second.payload ==
        std::vector<std::uint8_t>(64, 42));

  cluster.stop();
}

TEST_CASE("cluster splits payload and metadata like the in-process store") {
  auto seq_socket = std::make_shared<SequenceCounter>(0);
  auto seq_local = std::make_shared<SequenceCounter>(0);
  DmsServiceCluster cluster("dms_svc", small_dms_config(4), seq_socket);
  DmsStore local("dms", small_dms_config(4), seq_local);

  auto region = filled_region(rid("a"), box2(8, 8, 31, 31), 7);
  cluster.store().stage_on_shard(region, 2);
  local.stage_on_shard(region, 2);

  CHECK(payload_shards_of(cluster, rid("a")) == std::set<int>{2});
  CHECK(payload_shards_of(cluster, rid("a")) == local.payload_shards(rid("a")));
  CHECK(metadata_shards_of(cluster, rid("a")) ==
        local.metadata_shards(rid("a")));

  cluster.stop();
}

TEST_CASE("cluster read routed via any shard fetches from the home shard") {
  auto seq = std::make_shared<SequenceCounter>(0);
  DmsServiceCluster cluster("dms_svc", small_dms_config(4), seq);

  auto region = filled_region(rid("a"), box2(0, 0, 7, 7), 9);
  cluster.store().stage_on_shard(region, 3);
  CHECK(payload_shards_of(cluster, rid("a")) == std::set<int>{3});

  DataRegion back = cluster.store().read_region(rid("a"), box2(2, 2, 5, 5));
  CHECK(back.chunks().begin()->second.payload ==
        std::vector<std::uint8_t>(16, 9));

  cluster.stop();
}

TEST_CASE("cluster propagates the storage error taxonomy") {
  auto seq = std::make_shared<SequenceCounter>(0);
  DmsConfig cfg = small_dms_config(2);
  cfg.occupied = {box2(0, 0, 3, 7)};  // left half of the grid only
  DmsServiceCluster cluster("dms_svc", cfg, seq);
  auto& store = cluster.store();

  CHECK_THROWS_AS(store.read_region(rid("missing"), box2(0, 0, 7, 7)),
                  NotFoundError);
  // Query escaping the occupied half is unanswerable.
  CHECK_THROWS_AS(store.read_region(rid("missing"), box2(0, 0, 63, 63)),
                  NotFoundError);
  // Staging outside the occupied half is a placement error.
  auto outside = filled_region(rid("x"), box2(40, 0, 47, 7), 1);
  CHECK_THROWS_AS(store.stage_region(outside, 0), NotOccupiedError);

  auto a = filled_region(rid("a"), box2(0, 0, 7, 7), 3);
  auto b = filled_region(rid("b"), box2(0, 8, 7, 15), 4);
  store.stage_region(a, 0).wait();
  store.stage_region(b, 1).wait();
  store.delete_region(rid("a")).wait();
  store.delete_region(rid("a")).wait();  // idempotent
  CHECK_THROWS_AS(store.read_region(rid("a"), box2(0, 0, 7, 7)),
                  NotFoundError);
  DataRegion back = store.read_region(rid("b"), box2(0, 8, 7, 15));
  CHECK(back.chunks().begin()->second.payload ==
        std::vector<std::uint8_t>(64, 4));

  cluster.stop();
}

TEST_CASE("scripted interleaving matches the in-process store byte-exact") {
  auto seq_socket = std::make_shared<SequenceCounter>(0);
  auto seq_local = std::make_shared<SequenceCounter>(0);
  DmsServiceCluster cluster("dms_svc", small_dms_config(3), seq_socket);
  DmsStore local("dms", small_dms_config(3), seq_local);

  std::mt19937_64 rng(20260814);
  for (int step = 0; step < 60; ++step) {
    const auto key = std::string(1, char('a' + int(rng() % 3)));
    const std::int64_t l0 = std::int64_t(rng() % 48);
    const std::int64_t l1 = std::int64_t(rng() % 48);
    const BoundingBox box = box2(l0, l1, l0 + std::int64_t(rng() % 16),
                                 l1 + std::int64_t(rng() % 16));
    const std::uint64_t dice = rng() % 10;
    if (dice < 6) {
      auto region = filled_region(rid(key), box, std::uint8_t(rng() % 251));
      const int origin = int(rng() % 5);
      cluster.store().stage_region(region, origin).wait();
      local.stage_region(region, origin).wait();
    } else if (dice < 9) {
      DataRegion got_socket{rid("?"), RegionKind::kDense2D, ElementKind::kU8,
                            box};
      DataRegion got_local{rid("?"), RegionKind::kDense2D, ElementKind::kU8,
                           box};
      bool ok_socket = true;
      bool ok_local = true;
      try {
        got_socket = cluster.store().read_region(rid(key), box);
      } catch (const NotFoundError&) {
        ok_socket = false;
      }
      try {
        got_local = local.read_region(rid(key), box);
      } catch (const NotFoundError&) {
        ok_local = false;
      }
      REQUIRE(ok_socket == ok_local);
      if (ok_socket) {
        CHECK(got_socket.chunks().begin()->second.payload ==
              got_local.chunks().begin()->second.payload);
      }
    } else {
      cluster.store().delete_region(rid(key)).wait();
      local.delete_region(rid(key)).wait();
    }
  }

  cluster.stop();
}

TEST_CASE("socket store agrees with the sequential-replay oracle") {
  for (std::uint32_t seed = 900; seed < 930; ++seed) {
    auto seq = std::make_shared<SequenceCounter>(0);
    DmsServiceCluster cluster("dms_svc", small_dms_config(3), seq);
    testutil::run_oracle_trial(cluster.store(), seed, 40);
    cluster.stop();
  }
}

TEST_CASE("whole-backend service exposes a disk store over one socket") {
  IoGroupConfig cfg;
  cfg.placement = IoPlacement::kSeparated;
  cfg.distribution = IoDistribution::kRoundRobin;
  cfg.io_node_count = 2;
  cfg.group_size = 2;
  cfg.queue_threshold = 2;
  cfg.directory = fresh_dir("svc_disk");
  auto seq = std::make_shared<SequenceCounter>(0);
  DiskStore disk("disk", cfg, seq);
  StorageServer server(disk);
  SocketStorageClient client("disk_client", server.port());

  auto region = filled_region(rid("a"), box2(0, 0, 9, 9), 17);
  client.stage_region(region, 0).wait();

  DataRegion via_socket = client.read_region(rid("a"), box2(2, 2, 7, 7));
  DataRegion direct = disk.read_region(rid("a"), box2(2, 2, 7, 7));
  CHECK(via_socket.chunks().begin()->second.payload ==
        direct.chunks().begin()->second.payload);

  CHECK_THROWS_AS(client.read_region(rid("nope"), box2(0, 0, 1, 1)),
                  NotFoundError);

  client.delete_region(rid("a")).wait();
  CHECK_THROWS_AS(client.read_region(rid("a"), box2(2, 2, 7, 7)),
                  NotFoundError);

  server.stop();
  std::filesystem::remove_all(cfg.directory);
}
