#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stage/sim/round.hpp"
#include "stage/sim/run_config.hpp"

namespace stage::sim {

// Checkpoints freeze a run mid-stream: server state, the fedavg shared model
// when present and every client's parameters. Together with the world
// (reconstructable from the config) this resumes bit-exactly.
void save_checkpoint(const std::string& path, const SimState& st,
                     const RunConfig& cfg, std::uint64_t seed);

struct LoadedCheckpoint {
  std::uint32_t config_hash = 0;
  std::uint32_t data_hash = 0;  // dataset identity, for cross-method reports
  std::uint64_t seed = 0;
  std::uint32_t round = 0;
  server::ServerState server;
  bool has_shared = false;
  num::ParamStore shared;
  std::vector<std::uint32_t> client_ids;
  std::vector<num::ParamStore> client_params;
  std::vector<double> client_taus;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

// Rebuilds the deterministic parts from the world and splices in the
// checkpointed state. Throws HashMismatchError if the checkpoint belongs to
// a different config.
SimState resume_sim_state(const World& world, const RunConfig& cfg,
                          const LoadedCheckpoint& ckpt);

struct SeedRunOutput {
  std::uint64_t seed = 0;
  std::vector<RoundMetrics> rounds;  // the rounds executed by this call
  SimState final_state;
  double final_val = 0.0;   // last round, sample-weighted across clients
  double final_test = 0.0;
};

// Runs one seed from scratch, or onward from `resume` when given. When
// `checkpoint_dir` is non-empty, writes ckpt_seed<S>_round<R>.bin at every
// cfg.checkpoint_every rounds (always at the final round).
SeedRunOutput run_seed(const World& world, const RunConfig& cfg,
                       std::uint64_t seed, const std::string& checkpoint_dir = "",
                       const LoadedCheckpoint* resume = nullptr);

struct SeedSummary {
  std::uint64_t seed = 0;
  double final_val = 0.0;
  double final_test = 0.0;
};

struct ExperimentResult {
  std::uint32_t config_hash = 0;
  std::vector<SeedSummary> seeds;
  std::vector<std::vector<RoundMetrics>> rounds_per_seed;
  double mean_val = 0.0, std_val = 0.0;    // across seeds, sample std
  double mean_test = 0.0, std_test = 0.0;
};

// All seeds of a config. With a non-empty out_dir writes metrics.csv,
// summary.json and checkpoints/; reruns produce byte-identical files.
ExperimentResult run_experiment(const RunConfig& cfg,
                                const std::string& out_dir = "");

// Same, on a prebuilt world (dataset loaded from file). The caller is
// responsible for the world matching the config.
ExperimentResult run_experiment_on(const World& world, const RunConfig& cfg,
                                   const std::string& out_dir = "");

// Deterministic renderings, exposed for the report tool and tests.
std::string render_metrics_csv(const ExperimentResult& result);
std::string render_summary_json(const RunConfig& cfg,
                                const ExperimentResult& result);

}  // namespace stage::sim
