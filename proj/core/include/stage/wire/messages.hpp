#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "stage/wire/bytes.hpp"

namespace stage::wire {

// Messages carry exactly the wire precision: 32-bit floats and u32 ids.
// Simulation code quantizes into these structs before any exchange, so a
// round trip through bytes is the identity.

struct ClientUpload {
  std::uint32_t client_id = 0;
  std::uint32_t round = 0;
  std::vector<std::uint32_t> anchor_ids;  // strictly increasing
  std::uint32_t mean_dim = 0;             // d_p
  std::vector<float> means;               // anchor_ids.size() x mean_dim
  std::vector<std::uint32_t> counts;      // one per active anchor
  float sketch_mean = 0.0f;
  float sketch_std = 0.0f;
  float meta_gradient = 0.0f;

  void validate() const;  // throws std::invalid_argument
  bool operator==(const ClientUpload&) const = default;
};

struct ServerBroadcast {
  std::uint32_t round = 0;
  std::uint32_t anchor_count = 0;  // M
  std::uint32_t protocol_dim = 0;  // d_p
  std::vector<float> prototypes;   // M x d_p row-major
  std::vector<float> controller_params;
  std::uint32_t config_hash = 0;

  void validate() const;
  bool operator==(const ServerBroadcast&) const = default;
};

enum class MessageType : std::uint8_t {
  client_upload = 1,
  server_broadcast = 2,
};

std::vector<std::uint8_t> serialize(const ClientUpload& msg);
std::vector<std::uint8_t> serialize(const ServerBroadcast& msg);

// Reads the header without consuming the message.
MessageType peek_type(std::span<const std::uint8_t> bytes);

ClientUpload deserialize_upload(std::span<const std::uint8_t> bytes);
ServerBroadcast deserialize_broadcast(std::span<const std::uint8_t> bytes);

}  // namespace stage::wire
