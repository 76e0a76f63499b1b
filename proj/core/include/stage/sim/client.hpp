#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "stage/graph/graph.hpp"
#include "stage/graph/partition.hpp"
#include "stage/graph/split.hpp"
#include "stage/num/param_store.hpp"
#include "stage/prop/adjacency.hpp"
#include "stage/prop/gnn.hpp"
#include "stage/semantics/anchor_bank.hpp"
#include "stage/sim/run_config.hpp"
#include "stage/wire/messages.hpp"

namespace stage::sim {

// The immutable world shared by every run of a config: drifted graph,
// partition, frozen encoders and the frozen anchor bank. Built once; run
// seeds only vary model init, splits and sampling.
struct World {
  graph::MultimodalGraph graph;
  graph::ClientPartition part;
  std::vector<std::vector<num::DenseMatrix>> encoders;
  std::shared_ptr<const semantics::AnchorBank> bank;
};

// Generates, partitions, drifts, noises and quantizes (f32 feature storage,
// simulating the file round trip). The result is exactly what cmd_gen writes
// to disk, so building from config and loading the written file are
// bit-identical paths into build_world_from_graph.
graph::MultimodalGraph build_dataset(const RunConfig& cfg);

// The partition every stage of the pipeline agrees on: topology plus the
// data seed, independent of features.
graph::ClientPartition partition_dataset(const graph::MultimodalGraph& g,
                                         const RunConfig& cfg);

// `g` must already be perturbed and quantized (build_dataset output or a
// loaded dataset file); only the partition, encoders and bank are derived.
World build_world_from_graph(graph::MultimodalGraph g, const RunConfig& cfg);

World build_world(const RunConfig& cfg);

struct ClientState {
  std::uint32_t id = 0;
  std::uint64_t run_seed = 0;

  graph::MultimodalGraph view;  // encoded local graph, client's own dims
  prop::Adjacency adj;          // propagation graph (train edges only for LP)
  std::vector<graph::Split> split;
  std::vector<std::uint32_t> train_nodes, val_nodes, test_nodes;

  // Link prediction only; pairs are local ids, eval negatives fixed per run.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> train_edges, val_edges,
      test_edges, val_neg, test_neg;

  std::shared_ptr<const semantics::AnchorBank> bank;
  num::ParamStore params;  // proj.* [, gnn.*, head.*]
  prop::GnnConfig gnn_cfg;
  double last_tau = 1.0;  // temperature deployed in the most recent epoch
  std::uint32_t epoch_counter = 0;  // global epoch index, seeds per-epoch draws
};

std::vector<ClientState> make_clients(const World& world, const RunConfig& cfg,
                                      std::uint64_t run_seed);

// Method capabilities. The no_bank arm degenerates to the fedavg compute
// path by construction: without the bank there is nothing to translate,
// no sketch and no controller input.
bool method_uses_bank(Method m);
bool method_uses_meta(Method m);
bool method_shares_params(Method m);

struct LocalTrainResult {
  wire::ClientUpload upload;
  double task_loss = 0.0;     // last epoch, before its step
  double gap_loss = 0.0;
  double entropy_loss = 0.0;
  double tau = 1.0;           // last epoch's temperature
  double meta_gradient = 0.0;
  bool gap_skipped = false;
  bool empty_val = false;     // g forced to 0: no validation data
};

// Full local round: local_epochs full-batch steps of
//   L = L_task + lambda * L_gap + beta * L_ent,
// temperature from the broadcast controller at each epoch start, then the
// post-training statistics quantized into the upload. Throws DivergenceError
// on a non-finite loss. Mutates only `client`.
LocalTrainResult local_train_stage(ClientState& client,
                                   const wire::ServerBroadcast& broadcast,
                                   const RunConfig& cfg);

// Task-only variant for the fedavg-family arms; upload is unused there.
LocalTrainResult local_train_task_only(ClientState& client,
                                       const RunConfig& cfg,
                                       std::uint32_t round);

struct MetaGradient {
  double g = 0.0;
  bool empty_val = false;
};

// Central finite difference of the frozen-parameter validation loss in the
// propagation temperature, step h = max(1e-3, 0.01 * tau), lower point
// clamped at the temperature floor.
MetaGradient compute_meta_gradient(const ClientState& client,
                                   const RunConfig& cfg, double tau);

// Finite-difference core with an injectable loss, exposed for testing.
double central_difference(double tau, const std::function<double(double)>& f);

struct EvalResult {
  double metric = 0.0;        // accuracy or AUC
  std::uint32_t count = 0;    // nodes or scored pairs
};

// Frozen-parameter evaluation on one split at the client's deployed
// temperature. Throws UndefinedMetricError when the metric is undefined.
EvalResult evaluate_task(const ClientState& client, const RunConfig& cfg,
                         graph::Split split);

// Rank-based AUC with average ranks on ties. Throws UndefinedMetricError
// when either side is empty.
double rank_auc(std::vector<double> positive_scores,
                std::vector<double> negative_scores);

// Frozen forward pass at the client's deployed temperature; feeds the
// diagnostic reports.
struct ClientForward {
  num::DenseMatrix h0;  // fused d_p embedding, the GNN layer-0 input
  prop::GnnTrace trace;
};
ClientForward client_forward(const ClientState& client);

// f32 quantization helpers shared by the wire structs and the simulator.
std::vector<float> quantize(const num::DenseMatrix& m);
num::DenseMatrix dequantize(const std::vector<float>& v, std::size_t rows,
                            std::size_t cols);

}  // namespace stage::sim
