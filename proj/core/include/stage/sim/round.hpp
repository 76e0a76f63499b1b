#pragma once

#include <cstdint>
#include <vector>

#include "stage/num/param_store.hpp"
#include "stage/server/server_state.hpp"
#include "stage/sim/client.hpp"
#include "stage/sim/run_config.hpp"

namespace stage::sim {

// Mutable per-run state: server plus all clients. `shared` is the
// fedavg-family global model (the shape-compatible parameter subset);
// empty for the stage-family arms.
struct SimState {
  server::ServerState server;
  num::ParamStore shared;
  std::vector<ClientState> clients;
};

SimState init_sim_state(const World& world, const RunConfig& cfg,
                        std::uint64_t run_seed);

// Parameter names present in every client with identical shapes; the
// fedavg aggregation set.
std::vector<std::string> shared_param_names(
    const std::vector<ClientState>& clients);

struct ClientRoundMetrics {
  std::uint32_t client_id = 0;
  double task_loss = 0.0;
  double gap_loss = 0.0;
  double entropy_loss = 0.0;
  double tau = 1.0;
  double meta_gradient = 0.0;
  double val_metric = 0.0;   // NaN when the split is empty
  double test_metric = 0.0;
  std::uint32_t val_count = 0;
  std::uint32_t test_count = 0;
  std::uint64_t upload_full = 0;
  std::uint64_t download_full = 0;
  std::uint64_t upload_gap_only = 0;
  std::uint64_t download_gap_only = 0;
};

struct RoundMetrics {
  std::uint32_t round = 0;
  std::vector<ClientRoundMetrics> clients;
  // Sample-weighted means over clients with data; NaN when nobody has any.
  double val_metric = 0.0;
  double test_metric = 0.0;
  double mean_task_loss = 0.0;
  double mean_gap_loss = 0.0;
  double mean_entropy_loss = 0.0;
  double mean_tau = 1.0;
  double mean_meta_gradient = 0.0;
  std::uint64_t upload_full = 0;  // totals across clients
  std::uint64_t download_full = 0;
  std::uint64_t upload_gap_only = 0;
  std::uint64_t download_gap_only = 0;
};

// One synchronous round. Every exchange passes through the wire codecs so
// in-process simulation and file-based replay see identical bytes. The round
// is atomic: if any client or server step throws, no state has changed.
// Client work parallelizes over cfg.jobs without affecting results.
RoundMetrics run_round(SimState& st, const RunConfig& cfg);

}  // namespace stage::sim
