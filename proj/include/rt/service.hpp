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

#ifndef RT_SERVICE_HPP
#define RT_SERVICE_HPP

#include <atomic>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "rt/dms.hpp"
#include "rt/storage.hpp"
#include "rt/trace.hpp"

namespace rt {

/// Service-mode message types. Every request is answered with exactly one
/// kAck, kData, or kErr.
enum class MessageType : std::uint8_t {
  kStage = 1,
  kRead = 2,
  kDelete = 3,
  kMetaPut = 4,
  kAck = 5,
  kData = 6,
  kErr = 7,
};

/// Error taxonomy carried inside kErr bodies so the client can rethrow the
/// matching exception type.
enum class WireErrorCode : std::uint8_t {
  kGeneric = 0,
  kNotFound = 1,
  kNotOccupied = 2,
  kRange = 3,
  kDuplicate = 4,
  kDecode = 5,
  kProtocol = 6,
  kConfig = 7,
  kIo = 8,
};

struct Message {
  MessageType type = MessageType::kAck;
  std::vector<std::uint8_t> body;
};

/// Frame: u32 body length (little-endian) | u8 type | body. Throws IoError on
/// socket failure and ProtocolError on malformed frames.
void send_message(int fd, MessageType type, std::span<const std::uint8_t> body);

/// Blocking receive; std::nullopt on orderly shutdown at a frame boundary.
std::optional<Message> recv_message_opt(int fd);

/// Blocking receive; orderly shutdown mid-conversation is an IoError.
Message recv_message(int fd);

WireErrorCode wire_error_code(const Error& e);
[[noreturn]] void throw_wire_error(WireErrorCode code, const std::string& msg);

/// One metadata/payload shard behind a loopback TCP listener. State mirrors
/// the in-process DmsShard; each accepted connection is served by its own
/// thread and all state access is serialized by a mutex.
class DmsShardServer {
 public:
  explicit DmsShardServer(int shard_id);
  ~DmsShardServer();
  DmsShardServer(const DmsShardServer&) = delete;
  DmsShardServer& operator=(const DmsShardServer&) = delete;

  int shard_id() const { return shard_id_; }
  int port() const { return port_; }
  void stop();

  /// Copy of the shard state for assertions (payload/metadata placement).
  DmsShard snapshot() const;

 private:
  void accept_loop();
  void serve_connection(int fd);
  Message handle(const Message& request);

  int shard_id_;
  int listen_fd_ = -1;
  int port_ = 0;
  std::atomic<bool> stopping_{false};
  std::thread accept_thread_;
  mutable std::mutex mu_;  // guards state_, conns_, conn_threads_
  DmsShard state_;
  std::vector<int> conns_;
  std::vector<std::thread> conn_threads_;
};

/// Memory-store client that speaks the shard protocol. Routing (cell grid,
/// curve intervals, shard ownership) is byte-for-byte the math used by the
/// in-process DmsStore; only the state lives behind sockets.
class DmsSocketStore : public StorageBackend {
 public:
  DmsSocketStore(std::string name, DmsConfig config, std::vector<int> ports,
                 std::shared_ptr<SequenceCounter> sequence,
                 const Clock* clock = nullptr, TraceLog* trace = nullptr);
  ~DmsSocketStore() override;
  DmsSocketStore(const DmsSocketStore&) = delete;
  DmsSocketStore& operator=(const DmsSocketStore&) = delete;

  const std::string& name() const override { return name_; }
  Completion stage_region(const DataRegion& region, int origin_node) override;
  DataRegion read_region(const DataRegionId& id,
                         const BoundingBox& query) override;
  Completion delete_region(const DataRegionId& id) override;

  ReadResult read_region_at(const DataRegionId& id, const BoundingBox& query);
  Completion stage_on_shard(const DataRegion& region, int home_shard);

  const DmsRouting& routing() const { return routing_; }
  int shard_count() const { return int(fds_.size()); }

 private:
  double now() const { return clock_ ? clock_->now() : 0.0; }
  void emit(const std::string& kind, const std::string& id,
            const std::string& device, std::uint64_t bytes);
  Message request(int shard, MessageType type,
                  std::span<const std::uint8_t> body);

  std::string name_;
  DmsRouting routing_;
  std::shared_ptr<SequenceCounter> sequence_;
  const Clock* clock_;
  TraceLog* trace_;
  std::vector<int> fds_;
  std::vector<std::unique_ptr<std::mutex>> conn_mu_;
};

/// Shard servers plus a connected client, one per config shard.
class DmsServiceCluster {
 public:
  DmsServiceCluster(std::string name, DmsConfig config,
                    std::shared_ptr<SequenceCounter> sequence,
                    const Clock* clock = nullptr, TraceLog* trace = nullptr);

  DmsSocketStore& store() { return *store_; }
  const DmsShardServer& server(int s) const { return *servers_.at(std::size_t(s)); }
  int shard_count() const { return int(servers_.size()); }
  void stop();

 private:
  std::vector<std::unique_ptr<DmsShardServer>> servers_;
  std::unique_ptr<DmsSocketStore> store_;
};

/// Whole-backend service: exposes any StorageBackend (e.g. a disk store with
/// its group scheduling intact) behind one listener. Regions travel as packed
/// templates inside kStage/kData bodies.
class StorageServer {
 public:
  explicit StorageServer(StorageBackend& backend);
  ~StorageServer();
  StorageServer(const StorageServer&) = delete;
  StorageServer& operator=(const StorageServer&) = delete;

  int port() const { return port_; }
  void stop();

 private:
  void accept_loop();
  void serve_connection(int fd);
  Message handle(const Message& request);

  StorageBackend& backend_;
  int listen_fd_ = -1;
  int port_ = 0;
  std::atomic<bool> stopping_{false};
  std::thread accept_thread_;
  std::mutex mu_;  // serializes backend calls and guards conns_
  std::vector<int> conns_;
  std::vector<std::thread> conn_threads_;
};

/// Client for StorageServer; drop-in StorageBackend.
class SocketStorageClient : public StorageBackend {
 public:
  SocketStorageClient(std::string name, int port);
  ~SocketStorageClient() override;
  SocketStorageClient(const SocketStorageClient&) = delete;
  SocketStorageClient& operator=(const SocketStorageClient&) = delete;

  const std::string& name() const override { return name_; }
  Completion stage_region(const DataRegion& region, int origin_node) override;
  DataRegion read_region(const DataRegionId& id,
                         const BoundingBox& query) override;
  Completion delete_region(const DataRegionId& id) override;

 private:
  Message request(MessageType type, std::span<const std::uint8_t> body);

  std::string name_;
  int fd_ = -1;
  std::mutex conn_mu_;
};

}  // namespace rt

#endif  // RT_SERVICE_HPP
