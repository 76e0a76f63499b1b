#include "stage/server/server_state.hpp"

#include <string>

#include "stage/wire/bytes.hpp"
#include "stage/wire/params.hpp"

namespace stage::server {

void write_server_state(wire::ByteWriter& w, const ServerState& state,
                        std::uint32_t config_hash) {
  w.magic("SRV1");
  w.u32(1);  // version
  w.u32(config_hash);
  w.u32(state.round);
  w.f64(state.m_ema);
  w.f64(state.eta_pi);
  w.u32(state.gap.round);
  w.u32(static_cast<std::uint32_t>(state.gap.rows.rows()));
  w.u32(static_cast<std::uint32_t>(state.gap.rows.cols()));
  for (double v : state.gap.rows.values()) w.f64(v);
  wire::write_param_store(w, state.controller.params);
}

LoadedServerState read_server_state(wire::ByteReader& r) {
  r.expect_magic("SRV1");
  const std::uint32_t version = r.u32();
  if (version != 1) {
    throw wire::ParseError(r.offset() - 4,
                           "unsupported SRV1 version " + std::to_string(version));
  }
  LoadedServerState out;
  out.config_hash = r.u32();
  out.state.round = r.u32();
  out.state.m_ema = r.f64();
  out.state.eta_pi = r.f64();
  out.state.gap.round = r.u32();
  const std::uint32_t rows = r.u32();
  const std::uint32_t cols = r.u32();
  out.state.gap.rows = num::DenseMatrix(rows, cols);
  for (double& v : out.state.gap.rows.values()) v = r.f64();
  out.state.controller.params = wire::read_param_store(r);
  return out;
}

void save_server_state(const ServerState& state, const std::string& path,
                       std::uint32_t config_hash) {
  wire::ByteWriter w;
  write_server_state(w, state, config_hash);
  wire::write_file(path, w.buffer());
}

LoadedServerState load_server_state(const std::string& path) {
  const auto data = wire::read_file(path);
  wire::ByteReader r(data);
  auto out = read_server_state(r);
  r.expect_end();
  return out;
}

}  // namespace stage::server
