#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stage/graph/split.hpp"
#include "stage/graph/synth.hpp"

namespace stage::sim {

enum class Method {
  stage,
  fedavg,
  stage_no_bank,
  stage_no_gap,
  stage_no_meta,
  stage_no_entropy,
};

enum class Task { node_classification, link_prediction };

enum class PartitionStrategy { communities, edgecut };

std::string to_string(Method m);
std::string to_string(Task t);
std::string to_string(PartitionStrategy p);
Method method_from_string(const std::string& s);
Task task_from_string(const std::string& s);
PartitionStrategy partition_from_string(const std::string& s);

// Full experiment description. The synthetic data seed lives in `data`; the
// per-run seeds below drive model init, splits and sampling, so one dataset
// serves all runs of a config.
struct RunConfig {
  Method method = Method::stage;
  Task task = Task::node_classification;
  graph::SynthConfig data;
  PartitionStrategy partition = PartitionStrategy::communities;

  std::uint32_t anchor_count = 128;  // M
  std::uint32_t protocol_dim = 64;   // d_p
  std::uint32_t gnn_hidden = 64;
  std::uint32_t gnn_layers = 2;
  double leaky_slope = 0.2;

  std::uint32_t rounds = 40;
  std::uint32_t local_epochs = 2;
  double learning_rate = 0.05;
  double lambda_gap = 0.2;
  double beta_entropy = 0.1;
  double tau_s = 0.1;
  double tau_c = 0.2;
  double m_ema = 0.9;
  double eta_pi = 0.01;
  double g_max = 10.0;
  std::uint32_t n_min = 1;

  double drift_alpha = 0.8;
  double noise_ratio = 0.0;
  graph::SplitFractions splits;

  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::uint32_t top_n = 10;
  std::uint32_t checkpoint_every = 0;  // 0: checkpoint only the final round
  std::uint32_t jobs = 1;
  bool diagnostics = false;

  std::uint32_t client_count() const { return data.client_count(); }
  void validate() const;
};

// Shortest decimal form that parses back to the identical double.
std::string format_double(double v);

// One line per field in a fixed order; the basis for config hashing, so any
// semantic change to a run changes the hash.
std::string canonical_config_string(const RunConfig& cfg);

// 32-bit FNV-1a over the canonical string. Embedded in every output file.
std::uint32_t config_hash(const RunConfig& cfg);

// Hash of the dataset-defining fields only (generator, partition, drift,
// noise). Two configs that differ elsewhere, e.g. in method, can share one
// dataset file; this is the hash the file carries.
std::uint32_t data_config_hash(const RunConfig& cfg);

// Desk-scale default benchmark: 4 clients, 6 classes, 1200 nodes, two
// modalities with per-client dims varying around 48 and 32.
RunConfig default_benchmark_config();

}  // namespace stage::sim
