#pragma once

#include <cstdint>
#include <string>

#include "stage/semantics/anchor_bank.hpp"
#include "stage/server/controller.hpp"
#include "stage/wire/bytes.hpp"

namespace stage::server {

// Everything the server owns between rounds. The anchor bank is not part of
// the state: it is frozen and reconstructable from the config seed.
struct ServerState {
  semantics::GlobalAnchorPrototypes gap;
  MetaController controller;
  std::uint32_t round = 0;
  double m_ema = 0.9;
  double eta_pi = 0.01;
};

void save_server_state(const ServerState& state, const std::string& path,
                       std::uint32_t config_hash);

struct LoadedServerState {
  ServerState state;
  std::uint32_t config_hash = 0;
};
LoadedServerState load_server_state(const std::string& path);

// Embeddable forms (self-describing, magic included) used by checkpoints.
void write_server_state(wire::ByteWriter& w, const ServerState& state,
                        std::uint32_t config_hash);
LoadedServerState read_server_state(wire::ByteReader& r);

}  // namespace stage::server
