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

#include "rt/service.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <map>

#include "rt/pack.hpp"
#include "rt/wire.hpp"

namespace rt {

namespace {

constexpr std::uint32_t kMaxBody = 1u << 30;

void write_exact(int fd, const std::uint8_t* buf, std::size_t n) {
  std::size_t off = 0;
  while (off < n) {
    const ssize_t sent = ::send(fd, buf + off, n - off, MSG_NOSIGNAL);
    if (sent < 0) {
      if (errno == EINTR) continue;
      throw IoError(std::string("socket send failed: ") +
                    std::strerror(errno));
    }
    off += std::size_t(sent);
  }
}

/// Returns false only on orderly shutdown before the first byte.
bool read_exact(int fd, std::uint8_t* buf, std::size_t n) {
  std::size_t off = 0;
  while (off < n) {
    const ssize_t got = ::recv(fd, buf + off, n - off, 0);
    if (got == 0) {
      if (off == 0) return false;
      throw IoError("connection closed mid-frame");
    }
    if (got < 0) {
      if (errno == EINTR) continue;
      throw IoError(std::string("socket recv failed: ") +
                    std::strerror(errno));
    }
    off += std::size_t(got);
  }
  return true;
}

int make_loopback_listener(int* port_out) {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw IoError("cannot create listener socket");
  const int one = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = 0;
  if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0 ||
      ::listen(fd, 16) < 0) {
    ::close(fd);
    throw IoError(std::string("cannot bind loopback listener: ") +
                  std::strerror(errno));
  }
  socklen_t len = sizeof(addr);
  if (::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len) < 0) {
    ::close(fd);
    throw IoError("cannot query listener port");
  }
  *port_out = int(ntohs(addr.sin_port));
  return fd;
}

int connect_loopback(int port) {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw IoError("cannot create client socket");
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(std::uint16_t(port));
  if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0) {
    ::close(fd);
    throw IoError("cannot connect to shard on port " + std::to_string(port) +
                  ": " + std::strerror(errno));
  }
  return fd;
}

void write_region_id(wire::Writer& w, const DataRegionId& id) {
  w.str(id.ns);
  w.str(id.key);
  w.str(id.type_tag);
  w.i64(id.timestamp);
  w.i64(id.version);
}

DataRegionId read_region_id(wire::Reader& r) {
  DataRegionId id;
  id.ns = r.str();
  id.key = r.str();
  id.type_tag = r.str();
  id.timestamp = r.i64();
  id.version = r.i64();
  return id;
}

template <typename Enum>
Enum checked_enum(std::uint8_t raw, std::uint8_t max, const char* what) {
  if (raw > max) throw DecodeError(std::string("bad enum value for ") + what);
  return Enum(raw);
}

std::vector<std::uint8_t> error_body(WireErrorCode code,
                                     const std::string& msg) {
  wire::Writer w;
  w.u8(std::uint8_t(code));
  w.str(msg);
  return w.take();
}

Message error_reply(const Error& e) {
  return Message{MessageType::kErr, error_body(wire_error_code(e), e.what())};
}

}  // namespace

void send_message(int fd, MessageType type,
                  std::span<const std::uint8_t> body) {
  if (body.size() > kMaxBody) throw ProtocolError("message body too large");
  wire::Writer w;
  w.u32(std::uint32_t(body.size()));
  w.u8(std::uint8_t(type));
  w.bytes(body);
  const auto& frame = w.buffer();
  write_exact(fd, frame.data(), frame.size());
}

std::optional<Message> recv_message_opt(int fd) {
  std::uint8_t header[5];
  if (!read_exact(fd, header, sizeof(header))) return std::nullopt;
  std::uint32_t len = 0;
  for (int i = 0; i < 4; ++i) len |= std::uint32_t(header[i]) << (8 * i);
  if (len > kMaxBody) throw ProtocolError("incoming frame too large");
  const std::uint8_t raw_type = header[4];
  if (raw_type < 1 || raw_type > 7) {
    throw ProtocolError("unknown message type " + std::to_string(raw_type));
  }
  Message m;
  m.type = MessageType(raw_type);
  m.body.resize(len);
  if (len > 0 && !read_exact(fd, m.body.data(), len)) {
    throw IoError("connection closed mid-frame");
  }
  return m;
}

Message recv_message(int fd) {
  auto m = recv_message_opt(fd);
  if (!m) throw IoError("connection closed while awaiting reply");
  return std::move(*m);
}

WireErrorCode wire_error_code(const Error& e) {
  if (dynamic_cast<const NotFoundError*>(&e)) return WireErrorCode::kNotFound;
  if (dynamic_cast<const NotOccupiedError*>(&e)) {
    return WireErrorCode::kNotOccupied;
  }
  if (dynamic_cast<const RangeError*>(&e)) return WireErrorCode::kRange;
  if (dynamic_cast<const DuplicateRegionError*>(&e)) {
    return WireErrorCode::kDuplicate;
  }
  if (dynamic_cast<const DecodeError*>(&e)) return WireErrorCode::kDecode;
  if (dynamic_cast<const ProtocolError*>(&e)) return WireErrorCode::kProtocol;
  if (dynamic_cast<const ConfigError*>(&e)) return WireErrorCode::kConfig;
  if (dynamic_cast<const IoError*>(&e)) return WireErrorCode::kIo;
  return WireErrorCode::kGeneric;
}

void throw_wire_error(WireErrorCode code, const std::string& msg) {
  switch (code) {
    case WireErrorCode::kNotFound:
      throw NotFoundError(msg);
    case WireErrorCode::kNotOccupied:
      throw NotOccupiedError(msg);
    case WireErrorCode::kRange:
      throw RangeError(msg);
    case WireErrorCode::kDuplicate:
      throw DuplicateRegionError(msg);
    case WireErrorCode::kDecode:
      throw DecodeError(msg);
    case WireErrorCode::kProtocol:
      throw ProtocolError(msg);
    case WireErrorCode::kConfig:
      throw ConfigError(msg);
    case WireErrorCode::kIo:
      throw IoError(msg);
    case WireErrorCode::kGeneric:
      break;
  }
  throw Error(msg);
}

namespace {

[[noreturn]] void rethrow_remote(const Message& reply) {
  wire::Reader r(reply.body);
  const auto code = WireErrorCode(r.u8());
  throw_wire_error(code, r.str());
}

}  // namespace

// ---------------------------------------------------------------------------
// DmsShardServer

DmsShardServer::DmsShardServer(int shard_id) : shard_id_(shard_id) {
  state_.shard_id = shard_id;
  listen_fd_ = make_loopback_listener(&port_);
  accept_thread_ = std::thread(&DmsShardServer::accept_loop, this);
}

DmsShardServer::~DmsShardServer() { stop(); }

void DmsShardServer::stop() {
  if (stopping_.exchange(true)) return;
  ::shutdown(listen_fd_, SHUT_RDWR);
  ::close(listen_fd_);
  if (accept_thread_.joinable()) accept_thread_.join();
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(mu_);
    for (int fd : conns_) ::shutdown(fd, SHUT_RDWR);
    workers.swap(conn_threads_);
  }
  for (auto& t : workers) {
    if (t.joinable()) t.join();
  }
}

DmsShard DmsShardServer::snapshot() const {
  std::lock_guard lock(mu_);
  return state_;
}

void DmsShardServer::accept_loop() {
  while (!stopping_.load()) {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR) continue;
      break;  // listener closed by stop()
    }
    std::lock_guard lock(mu_);
    conns_.push_back(fd);
    conn_threads_.emplace_back(&DmsShardServer::serve_connection, this, fd);
  }
}

void DmsShardServer::serve_connection(int fd) {
  try {
    while (auto request = recv_message_opt(fd)) {
      Message reply;
      try {
        reply = handle(*request);
      } catch (const Error& e) {
        reply = error_reply(e);
      }
      send_message(fd, reply.type, reply.body);
    }
  } catch (const Error&) {
    // Connection-level failure: drop the connection, keep serving others.
  }
  ::close(fd);
  std::lock_guard lock(mu_);
  std::erase(conns_, fd);
}

Message DmsShardServer::handle(const Message& request) {
  wire::Reader r(request.body);
  switch (request.type) {
    case MessageType::kStage: {
      const DataRegionId id = read_region_id(r);
      const BoundingBox box = r.bbox();
      const auto kind = checked_enum<RegionKind>(r.u8(), 4, "region kind");
      const auto elem = checked_enum<ElementKind>(r.u8(), 4, "element kind");
      const std::uint64_t seq = r.u64();
      const std::uint64_t len = r.u64();
      auto payload = r.bytes(len);
      std::lock_guard lock(mu_);
      auto& stored = state_.data_store[std::make_pair(id, box)];
      stored.payload = std::move(payload);
      stored.kind = kind;
      stored.element_kind = elem;
      stored.seq = seq;
      return Message{MessageType::kAck, {}};
    }
    case MessageType::kMetaPut: {
      const DataRegionId id = read_region_id(r);
      const BoundingBox box = r.bbox();
      DmsMetaValue meta;
      meta.kind = checked_enum<RegionKind>(r.u8(), 4, "region kind");
      meta.element_kind = checked_enum<ElementKind>(r.u8(), 4, "element kind");
      meta.home_shard = int(r.u32());
      meta.seq = r.u64();
      const std::uint32_t count = r.u32();
      std::vector<sfc::SfcInterval> intervals;
      intervals.reserve(count);
      for (std::uint32_t i = 0; i < count; ++i) {
        const std::uint64_t start = r.u64();
        const std::uint64_t end = r.u64();
        intervals.push_back(sfc::SfcInterval{start, end});
      }
      std::lock_guard lock(mu_);
      for (const auto& iv : intervals) {
        state_.metadata_index[iv][std::make_pair(id, box)] = meta;
      }
      return Message{MessageType::kAck, {}};
    }
    case MessageType::kRead: {
      const std::uint8_t mode = r.u8();
      if (mode == 0) {
        // Metadata query: which chunk descriptors overlap these intervals?
        const DataRegionId id = read_region_id(r);
        const BoundingBox query = r.bbox();
        const std::uint32_t count = r.u32();
        std::vector<sfc::SfcInterval> qivs;
        qivs.reserve(count);
        for (std::uint32_t i = 0; i < count; ++i) {
          const std::uint64_t start = r.u64();
          const std::uint64_t end = r.u64();
          qivs.push_back(sfc::SfcInterval{start, end});
        }
        std::map<BoundingBox, DmsMetaValue> entries;
        {
          std::lock_guard lock(mu_);
          for (const auto& [iv, chunk_map] : state_.metadata_index) {
            const bool touches =
                std::any_of(qivs.begin(), qivs.end(), [&](const auto& q) {
                  return !(iv.end < q.start || iv.start > q.end);
                });
            if (!touches) continue;
            for (const auto& [key, meta] : chunk_map) {
              if (!(key.first == id)) continue;
              if (!key.second.intersects(query)) continue;
              auto [it, inserted] = entries.try_emplace(key.second, meta);
              if (!inserted && it->second.seq < meta.seq) it->second = meta;
            }
          }
        }
        wire::Writer w;
        w.u32(std::uint32_t(entries.size()));
        for (const auto& [box, meta] : entries) {
          w.bbox(box);
          w.u8(std::uint8_t(meta.kind));
          w.u8(std::uint8_t(meta.element_kind));
          w.u32(std::uint32_t(meta.home_shard));
          w.u64(meta.seq);
        }
        return Message{MessageType::kData, w.take()};
      }
      if (mode == 1) {
        // Payload fetch for one exact chunk key.
        const DataRegionId id = read_region_id(r);
        const BoundingBox box = r.bbox();
        std::lock_guard lock(mu_);
        auto it = state_.data_store.find(std::make_pair(id, box));
        if (it == state_.data_store.end()) {
          throw NotFoundError("metadata without payload for " +
                              id.to_string());
        }
        wire::Writer w;
        w.u8(std::uint8_t(it->second.kind));
        w.u8(std::uint8_t(it->second.element_kind));
        w.u64(it->second.seq);
        w.u64(it->second.payload.size());
        w.bytes(it->second.payload);
        return Message{MessageType::kData, w.take()};
      }
      throw ProtocolError("unknown read mode");
    }
    case MessageType::kDelete: {
      const DataRegionId id = read_region_id(r);
      std::lock_guard lock(mu_);
      std::erase_if(state_.data_store,
                    [&](const auto& kv) { return kv.first.first == id; });
      for (auto& [iv, chunk_map] : state_.metadata_index) {
        std::erase_if(chunk_map,
                      [&](const auto& kv) { return kv.first.first == id; });
      }
      std::erase_if(state_.metadata_index,
                    [](const auto& kv) { return kv.second.empty(); });
      return Message{MessageType::kAck, {}};
    }
    default:
      throw ProtocolError("request type not valid for a shard");
  }
}

// ---------------------------------------------------------------------------
// DmsSocketStore

DmsSocketStore::DmsSocketStore(std::string name, DmsConfig config,
                               std::vector<int> ports,
                               std::shared_ptr<SequenceCounter> sequence,
                               const Clock* clock, TraceLog* trace)
    : name_(std::move(name)),
      routing_(std::move(config)),
      sequence_(std::move(sequence)),
      clock_(clock),
      trace_(trace) {
  if (!sequence_) throw ConfigError("dms requires a sequence counter");
  if (int(ports.size()) != routing_.config().shard_count) {
    throw ConfigError("shard port list does not match shard_count");
  }
  fds_.reserve(ports.size());
  conn_mu_.reserve(ports.size());
  for (int port : ports) {
    fds_.push_back(connect_loopback(port));
    conn_mu_.push_back(std::make_unique<std::mutex>());
  }
}

DmsSocketStore::~DmsSocketStore() {
  for (int fd : fds_) {
    ::shutdown(fd, SHUT_RDWR);
    ::close(fd);
  }
}

void DmsSocketStore::emit(const std::string& kind, const std::string& id,
                          const std::string& device, std::uint64_t bytes) {
  if (trace_) trace_->emit(now(), kind, id, device, bytes);
}

Message DmsSocketStore::request(int shard, MessageType type,
                                std::span<const std::uint8_t> body) {
  std::lock_guard lock(*conn_mu_[std::size_t(shard)]);
  send_message(fds_[std::size_t(shard)], type, body);
  Message reply = recv_message(fds_[std::size_t(shard)]);
  if (reply.type == MessageType::kErr) rethrow_remote(reply);
  return reply;
}

Completion DmsSocketStore::stage_region(const DataRegion& region,
                                        int origin_node) {
  const int count = routing_.config().shard_count;
  const int home = ((origin_node % count) + count) % count;
  return stage_on_shard(region, home);
}

Completion DmsSocketStore::stage_on_shard(const DataRegion& region,
                                          int home_shard) {
  if (home_shard < 0 || home_shard >= routing_.config().shard_count) {
    throw RangeError("home shard out of range");
  }
  if (!region.materialized()) {
    throw NotFoundError("cannot stage a region without payload: " +
                        region.id().to_string());
  }
  std::uint64_t staged_bytes = 0;
  for (const auto& [box, chunk] : region.chunks()) {
    const auto intervals = routing_.occupied_intervals(box);
    std::map<int, std::vector<sfc::SfcInterval>> per_owner;
    for (const auto& iv : intervals) {
      for (int owner : routing_.owners_of_intervals({iv})) {
        per_owner[owner].push_back(iv);
      }
    }

    const std::uint64_t seq = ++(*sequence_);
    wire::Writer stage;
    write_region_id(stage, region.id());
    stage.bbox(box);
    stage.u8(std::uint8_t(region.kind()));
    stage.u8(std::uint8_t(region.element_kind()));
    stage.u64(seq);
    stage.u64(chunk.payload.size());
    stage.bytes(chunk.payload);
    request(home_shard, MessageType::kStage, stage.buffer());

    for (const auto& [owner, ivs] : per_owner) {
      wire::Writer meta;
      write_region_id(meta, region.id());
      meta.bbox(box);
      meta.u8(std::uint8_t(region.kind()));
      meta.u8(std::uint8_t(region.element_kind()));
      meta.u32(std::uint32_t(home_shard));
      meta.u64(seq);
      meta.u32(std::uint32_t(ivs.size()));
      for (const auto& iv : ivs) {
        meta.u64(iv.start);
        meta.u64(iv.end);
      }
      request(owner, MessageType::kMetaPut, meta.buffer());
    }
    staged_bytes += chunk.payload.size();
  }

  emit("dms_stage", region.id().to_string(),
       "shard" + std::to_string(home_shard), staged_bytes);
  const double bw = routing_.config().stage_bandwidth;
  const double cost = bw > 0 ? double(staged_bytes) / bw : 0.0;
  return Completion::ready(now() + cost);
}

DataRegion DmsSocketStore::read_region(const DataRegionId& id,
                                       const BoundingBox& query) {
  return read_region_at(id, query).region;
}

ReadResult DmsSocketStore::read_region_at(const DataRegionId& id,
                                          const BoundingBox& query) {
  std::vector<sfc::SfcInterval> query_intervals;
  try {
    query_intervals = routing_.occupied_intervals(query);
  } catch (const NotOccupiedError& e) {
    throw NotFoundError(std::string("query touches unstaged cells: ") +
                        e.what());
  }

  wire::Writer q;
  q.u8(0);
  write_region_id(q, id);
  q.bbox(query);
  q.u32(std::uint32_t(query_intervals.size()));
  for (const auto& iv : query_intervals) {
    q.u64(iv.start);
    q.u64(iv.end);
  }

  std::map<BoundingBox, DmsMetaValue> entries;
  for (int owner : routing_.owners_of_intervals(query_intervals)) {
    Message reply = request(owner, MessageType::kRead, q.buffer());
    if (reply.type != MessageType::kData) {
      throw ProtocolError("metadata query expected a data reply");
    }
    wire::Reader r(reply.body);
    const std::uint32_t count = r.u32();
    for (std::uint32_t i = 0; i < count; ++i) {
      const BoundingBox box = r.bbox();
      DmsMetaValue meta;
      meta.kind = checked_enum<RegionKind>(r.u8(), 4, "region kind");
      meta.element_kind = checked_enum<ElementKind>(r.u8(), 4, "element kind");
      meta.home_shard = int(r.u32());
      meta.seq = r.u64();
      auto [it, inserted] = entries.try_emplace(box, meta);
      if (!inserted && it->second.seq < meta.seq) it->second = meta;
    }
  }
  if (entries.empty()) {
    throw NotFoundError("no staged data for " + id.to_string() + " over " +
                        query.to_string());
  }

  std::vector<BoundingBox> entry_boxes;
  entry_boxes.reserve(entries.size());
  for (const auto& [box, meta] : entries) entry_boxes.push_back(box);
  routing_.check_cell_coverage(query, entry_boxes);

  std::vector<AssemblePiece> pieces;
  for (const auto& [box, meta] : entries) {
    wire::Writer f;
    f.u8(1);
    write_region_id(f, id);
    f.bbox(box);
    Message reply = request(meta.home_shard, MessageType::kRead, f.buffer());
    if (reply.type != MessageType::kData) {
      throw ProtocolError("payload fetch expected a data reply");
    }
    wire::Reader r(reply.body);
    AssemblePiece piece;
    piece.box = box;
    piece.kind = checked_enum<RegionKind>(r.u8(), 4, "region kind");
    piece.element_kind = checked_enum<ElementKind>(r.u8(), 4, "element kind");
    piece.seq = r.u64();
    const std::uint64_t len = r.u64();
    piece.payload = r.bytes(len);
    pieces.push_back(std::move(piece));
  }
  AssembledRead assembled = assemble_read(id, query, std::move(pieces));
  emit("dms_read", id.to_string(), "-", assembled.moved_bytes);
  const double bw = routing_.config().read_bandwidth;
  const double cost = bw > 0 ? double(assembled.moved_bytes) / bw : 0.0;
  return ReadResult{std::move(assembled.region), now() + cost};
}

Completion DmsSocketStore::delete_region(const DataRegionId& id) {
  wire::Writer w;
  write_region_id(w, id);
  for (int s = 0; s < shard_count(); ++s) {
    request(s, MessageType::kDelete, w.buffer());
  }
  emit("dms_delete", id.to_string(), "-", 0);
  return Completion::ready(now());
}

// ---------------------------------------------------------------------------
// DmsServiceCluster

DmsServiceCluster::DmsServiceCluster(std::string name, DmsConfig config,
                                     std::shared_ptr<SequenceCounter> sequence,
                                     const Clock* clock, TraceLog* trace) {
  config.validate();
  std::vector<int> ports;
  for (int s = 0; s < config.shard_count; ++s) {
    servers_.push_back(std::make_unique<DmsShardServer>(s));
    ports.push_back(servers_.back()->port());
  }
  store_ = std::make_unique<DmsSocketStore>(std::move(name), std::move(config),
                                            std::move(ports),
                                            std::move(sequence), clock, trace);
}

void DmsServiceCluster::stop() {
  store_.reset();  // close client connections first so servers see EOF
  for (auto& server : servers_) server->stop();
}

// ---------------------------------------------------------------------------
// StorageServer

StorageServer::StorageServer(StorageBackend& backend) : backend_(backend) {
  listen_fd_ = make_loopback_listener(&port_);
  accept_thread_ = std::thread(&StorageServer::accept_loop, this);
}

StorageServer::~StorageServer() { stop(); }

void StorageServer::stop() {
  if (stopping_.exchange(true)) return;
  ::shutdown(listen_fd_, SHUT_RDWR);
  ::close(listen_fd_);
  if (accept_thread_.joinable()) accept_thread_.join();
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(mu_);
    for (int fd : conns_) ::shutdown(fd, SHUT_RDWR);
    workers.swap(conn_threads_);
  }
  for (auto& t : workers) {
    if (t.joinable()) t.join();
  }
}

void StorageServer::accept_loop() {
  while (!stopping_.load()) {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR) continue;
      break;
    }
    std::lock_guard lock(mu_);
    conns_.push_back(fd);
    conn_threads_.emplace_back(&StorageServer::serve_connection, this, fd);
  }
}

void StorageServer::serve_connection(int fd) {
  try {
    while (auto request = recv_message_opt(fd)) {
      Message reply;
      try {
        reply = handle(*request);
      } catch (const Error& e) {
        reply = error_reply(e);
      }
      send_message(fd, reply.type, reply.body);
    }
  } catch (const Error&) {
  }
  ::close(fd);
  std::lock_guard lock(mu_);
  std::erase(conns_, fd);
}

Message StorageServer::handle(const Message& request) {
  wire::Reader r(request.body);
  switch (request.type) {
    case MessageType::kStage: {
      const int origin = int(r.u32());
      const std::uint64_t len = r.u64();
      const auto packed = r.bytes(len);
      const RegionTemplate t = unpack_template(packed);
      std::lock_guard lock(mu_);
      for (const auto& [id, region] : t.regions()) {
        backend_.stage_region(region, origin).wait();
      }
      return Message{MessageType::kAck, {}};
    }
    case MessageType::kRead: {
      const DataRegionId id = read_region_id(r);
      const BoundingBox query = r.bbox();
      DataRegion region = [&] {
        std::lock_guard lock(mu_);
        return backend_.read_region(id, query);
      }();
      RegionTemplate t("wire");
      t.insert_data_region(std::move(region));
      const auto packed = pack_template(t, /*include_payload=*/true);
      wire::Writer w;
      w.u64(packed.size());
      w.bytes(packed);
      return Message{MessageType::kData, w.take()};
    }
    case MessageType::kDelete: {
      const DataRegionId id = read_region_id(r);
      std::lock_guard lock(mu_);
      backend_.delete_region(id).wait();
      return Message{MessageType::kAck, {}};
    }
    default:
      throw ProtocolError("request type not valid for a storage service");
  }
}

// ---------------------------------------------------------------------------
// SocketStorageClient

SocketStorageClient::SocketStorageClient(std::string name, int port)
    : name_(std::move(name)), fd_(connect_loopback(port)) {}

SocketStorageClient::~SocketStorageClient() {
  ::shutdown(fd_, SHUT_RDWR);
  ::close(fd_);
}

Message SocketStorageClient::request(MessageType type,
                                     std::span<const std::uint8_t> body) {
  std::lock_guard lock(conn_mu_);
  send_message(fd_, type, body);
  Message reply = recv_message(fd_);
  if (reply.type == MessageType::kErr) rethrow_remote(reply);
  return reply;
}

Completion SocketStorageClient::stage_region(const DataRegion& region,
                                             int origin_node) {
  RegionTemplate t("wire");
  t.insert_data_region(region);
  const auto packed = pack_template(t, /*include_payload=*/true);
  wire::Writer w;
  w.u32(std::uint32_t(origin_node));
  w.u64(packed.size());
  w.bytes(packed);
  request(MessageType::kStage, w.buffer());
  return Completion::ready();
}

DataRegion SocketStorageClient::read_region(const DataRegionId& id,
                                            const BoundingBox& query) {
  wire::Writer w;
  write_region_id(w, id);
  w.bbox(query);
  Message reply = request(MessageType::kRead, w.buffer());
  if (reply.type != MessageType::kData) {
    throw ProtocolError("read expected a data reply");
  }
  wire::Reader r(reply.body);
  const std::uint64_t len = r.u64();
  const auto packed = r.bytes(len);
  RegionTemplate t = unpack_template(packed);
  if (t.regions().size() != 1) {
    throw ProtocolError("read reply must carry exactly one region");
  }
  return t.regions().begin()->second;
}

Completion SocketStorageClient::delete_region(const DataRegionId& id) {
  wire::Writer w;
  write_region_id(w, id);
  request(MessageType::kDelete, w.buffer());
  return Completion::ready();
}

}  // namespace rt
