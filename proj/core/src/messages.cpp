#include "stage/wire/messages.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace stage::wire {

namespace {

constexpr char kMagic[5] = "STG1";

void write_header(ByteWriter& w, MessageType type, std::uint32_t round) {
  w.magic(kMagic);
  w.u8(static_cast<std::uint8_t>(type));
  w.u32(round);
}

MessageType read_header(ByteReader& r, std::uint32_t& round) {
  r.expect_magic(kMagic);
  const std::size_t at = r.offset();
  const std::uint8_t type = r.u8();
  if (type != static_cast<std::uint8_t>(MessageType::client_upload) &&
      type != static_cast<std::uint8_t>(MessageType::server_broadcast)) {
    throw ParseError(at, "unknown message type " + std::to_string(type));
  }
  round = r.u32();
  return static_cast<MessageType>(type);
}

}  // namespace

void ClientUpload::validate() const {
  for (std::size_t i = 1; i < anchor_ids.size(); ++i) {
    if (anchor_ids[i] <= anchor_ids[i - 1]) {
      throw std::invalid_argument("anchor ids must be strictly increasing");
    }
  }
  if (counts.size() != anchor_ids.size()) {
    throw std::invalid_argument("count list length != anchor id count");
  }
  if (means.size() !=
      static_cast<std::size_t>(anchor_ids.size()) * mean_dim) {
    throw std::invalid_argument("mean block size != ids * mean_dim");
  }
}

void ServerBroadcast::validate() const {
  if (prototypes.size() !=
      static_cast<std::size_t>(anchor_count) * protocol_dim) {
    throw std::invalid_argument("prototype block size != M * d_p");
  }
}

std::vector<std::uint8_t> serialize(const ClientUpload& msg) {
  msg.validate();
  ByteWriter w;
  write_header(w, MessageType::client_upload, msg.round);
  w.u32(msg.client_id);
  w.u32(static_cast<std::uint32_t>(msg.anchor_ids.size()));
  for (auto id : msg.anchor_ids) w.u32(id);
  w.u32(msg.mean_dim);
  w.u32(static_cast<std::uint32_t>(msg.means.size()));
  for (float v : msg.means) w.f32(v);
  w.u32(static_cast<std::uint32_t>(msg.counts.size()));
  for (auto c : msg.counts) w.u32(c);
  w.f32(msg.sketch_mean);
  w.f32(msg.sketch_std);
  w.f32(msg.meta_gradient);
  return w.take();
}

std::vector<std::uint8_t> serialize(const ServerBroadcast& msg) {
  msg.validate();
  ByteWriter w;
  write_header(w, MessageType::server_broadcast, msg.round);
  w.u32(msg.anchor_count);
  w.u32(msg.protocol_dim);
  w.u32(static_cast<std::uint32_t>(msg.prototypes.size()));
  for (float v : msg.prototypes) w.f32(v);
  w.u32(static_cast<std::uint32_t>(msg.controller_params.size()));
  for (float v : msg.controller_params) w.f32(v);
  w.u32(msg.config_hash);
  return w.take();
}

MessageType peek_type(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  std::uint32_t round = 0;
  return read_header(r, round);
}

ClientUpload deserialize_upload(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  std::uint32_t round = 0;
  if (read_header(r, round) != MessageType::client_upload) {
    throw ParseError(4, "not a client upload");
  }
  ClientUpload msg;
  msg.round = round;
  msg.client_id = r.u32();
  const std::size_t ids_at = r.offset();
  const std::uint32_t id_count = r.u32();
  msg.anchor_ids.resize(id_count);
  for (auto& id : msg.anchor_ids) id = r.u32();
  for (std::size_t i = 1; i < msg.anchor_ids.size(); ++i) {
    if (msg.anchor_ids[i] <= msg.anchor_ids[i - 1]) {
      throw ParseError(ids_at, "anchor ids not strictly increasing");
    }
  }
  msg.mean_dim = r.u32();
  const std::size_t means_at = r.offset();
  const std::uint32_t mean_count = r.u32();
  if (mean_count != static_cast<std::uint64_t>(id_count) * msg.mean_dim) {
    throw ParseError(means_at, "mean block length mismatch");
  }
  msg.means.resize(mean_count);
  for (auto& v : msg.means) v = r.f32();
  const std::size_t counts_at = r.offset();
  const std::uint32_t count_count = r.u32();
  if (count_count != id_count) {
    throw ParseError(counts_at, "count list length mismatch");
  }
  msg.counts.resize(count_count);
  for (auto& c : msg.counts) c = r.u32();
  msg.sketch_mean = r.f32();
  msg.sketch_std = r.f32();
  msg.meta_gradient = r.f32();
  r.expect_end();
  return msg;
}

ServerBroadcast deserialize_broadcast(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  std::uint32_t round = 0;
  if (read_header(r, round) != MessageType::server_broadcast) {
    throw ParseError(4, "not a server broadcast");
  }
  ServerBroadcast msg;
  msg.round = round;
  msg.anchor_count = r.u32();
  msg.protocol_dim = r.u32();
  const std::size_t proto_at = r.offset();
  const std::uint32_t proto_count = r.u32();
  if (proto_count !=
      static_cast<std::uint64_t>(msg.anchor_count) * msg.protocol_dim) {
    throw ParseError(proto_at, "prototype block length mismatch");
  }
  msg.prototypes.resize(proto_count);
  for (auto& v : msg.prototypes) v = r.f32();
  const std::uint32_t ctrl_count = r.u32();
  msg.controller_params.resize(ctrl_count);
  for (auto& v : msg.controller_params) v = r.f32();
  msg.config_hash = r.u32();
  r.expect_end();
  return msg;
}

}  // namespace stage::wire
