#include "stage/sim/run_config.hpp"

#include <cinttypes>
#include <cstdio>
#include <stdexcept>

namespace stage::sim {
// Shortest round-trip decimal form keeps the canonical string stable across
// platforms with IEEE doubles.
std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  double back = 0.0;
  for (int prec = 1; prec <= 16; ++prec) {
    char probe[64];
    std::snprintf(probe, sizeof(probe), "%.*g", prec, v);
    std::sscanf(probe, "%lf", &back);
    if (back == v) return probe;
  }
  return buf;
}

std::string to_string(Method m) {
  switch (m) {
    case Method::stage: return "stage";
    case Method::fedavg: return "fedavg";
    case Method::stage_no_bank: return "stage_no_bank";
    case Method::stage_no_gap: return "stage_no_gap";
    case Method::stage_no_meta: return "stage_no_meta";
    case Method::stage_no_entropy: return "stage_no_entropy";
  }
  throw std::invalid_argument("unknown method");
}

std::string to_string(Task t) {
  switch (t) {
    case Task::node_classification: return "node_classification";
    case Task::link_prediction: return "link_prediction";
  }
  throw std::invalid_argument("unknown task");
}

std::string to_string(PartitionStrategy p) {
  switch (p) {
    case PartitionStrategy::communities: return "communities";
    case PartitionStrategy::edgecut: return "edgecut";
  }
  throw std::invalid_argument("unknown partition strategy");
}

Method method_from_string(const std::string& s) {
  if (s == "stage") return Method::stage;
  if (s == "fedavg") return Method::fedavg;
  if (s == "stage_no_bank") return Method::stage_no_bank;
  if (s == "stage_no_gap") return Method::stage_no_gap;
  if (s == "stage_no_meta") return Method::stage_no_meta;
  if (s == "stage_no_entropy") return Method::stage_no_entropy;
  throw std::invalid_argument("unknown method: " + s);
}

Task task_from_string(const std::string& s) {
  if (s == "node_classification") return Task::node_classification;
  if (s == "link_prediction") return Task::link_prediction;
  throw std::invalid_argument("unknown task: " + s);
}

PartitionStrategy partition_from_string(const std::string& s) {
  if (s == "communities") return PartitionStrategy::communities;
  if (s == "edgecut") return PartitionStrategy::edgecut;
  throw std::invalid_argument("unknown partition strategy: " + s);
}

void RunConfig::validate() const {
  data.validate();
  if (data.client_count() < 2) throw std::invalid_argument("need >= 2 clients");
  if (anchor_count == 0) throw std::invalid_argument("anchor_count must be positive");
  if (protocol_dim == 0) throw std::invalid_argument("protocol_dim must be positive");
  if (gnn_hidden == 0) throw std::invalid_argument("gnn_hidden must be positive");
  if (gnn_layers == 0) throw std::invalid_argument("gnn_layers must be positive");
  if (rounds == 0) throw std::invalid_argument("rounds must be positive");
  if (local_epochs == 0) throw std::invalid_argument("local_epochs must be positive");
  if (!(learning_rate >= 0.0)) throw std::invalid_argument("learning_rate must be >= 0");
  if (!(tau_s > 0.0)) throw std::invalid_argument("tau_s must be positive");
  if (!(tau_c > 0.0)) throw std::invalid_argument("tau_c must be positive");
  if (!(m_ema >= 0.0 && m_ema < 1.0)) throw std::invalid_argument("m_ema must be in [0,1)");
  if (!(eta_pi > 0.0)) throw std::invalid_argument("eta_pi must be positive");
  if (!(g_max > 0.0)) throw std::invalid_argument("g_max must be positive");
  if (lambda_gap < 0.0) throw std::invalid_argument("lambda_gap must be >= 0");
  if (beta_entropy < 0.0) throw std::invalid_argument("beta_entropy must be >= 0");
  if (!(noise_ratio >= 0.0 && noise_ratio <= 1.0))
    throw std::invalid_argument("noise_ratio must be in [0,1]");
  splits.validate();
  if (seeds.empty()) throw std::invalid_argument("need at least one seed");
  if (top_n == 0) throw std::invalid_argument("top_n must be positive");
  if (jobs == 0) throw std::invalid_argument("jobs must be positive");
}

namespace {

// Fields that determine the dataset file: generator, partition and the
// perturbations baked into the stored features.
void append_data_lines(std::string& out, const RunConfig& cfg) {
  auto line = [&out](const std::string& key, const std::string& value) {
    out += key;
    out += '=';
    out += value;
    out += '\n';
  };
  line("partition", to_string(cfg.partition));
  line("data.node_count", std::to_string(cfg.data.node_count));
  line("data.class_count", std::to_string(cfg.data.class_count));
  line("data.p_in", format_double(cfg.data.p_in));
  line("data.p_out", format_double(cfg.data.p_out));
  line("data.prototype_scale", format_double(cfg.data.prototype_scale));
  line("data.noise_std", format_double(cfg.data.noise_std));
  line("data.mask_drop", format_double(cfg.data.mask_drop));
  line("data.seed", std::to_string(cfg.data.seed));
  {
    std::string dims;
    for (std::size_t k = 0; k < cfg.data.client_modality_dims.size(); ++k) {
      if (k) dims += ';';
      const auto& row = cfg.data.client_modality_dims[k];
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (c) dims += ',';
        dims += std::to_string(row[c]);
      }
    }
    line("data.client_modality_dims", dims);
  }
  line("drift_alpha", format_double(cfg.drift_alpha));
  line("noise_ratio", format_double(cfg.noise_ratio));
}

std::uint32_t fnv1a32(const std::string& s) {
  std::uint32_t h = 2166136261u;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 16777619u;
  }
  return h;
}

}  // namespace

std::string canonical_config_string(const RunConfig& cfg) {
  std::string out;
  auto line = [&out](const std::string& key, const std::string& value) {
    out += key;
    out += '=';
    out += value;
    out += '\n';
  };
  line("method", to_string(cfg.method));
  line("task", to_string(cfg.task));
  append_data_lines(out, cfg);
  line("anchor_count", std::to_string(cfg.anchor_count));
  line("protocol_dim", std::to_string(cfg.protocol_dim));
  line("gnn_hidden", std::to_string(cfg.gnn_hidden));
  line("gnn_layers", std::to_string(cfg.gnn_layers));
  line("leaky_slope", format_double(cfg.leaky_slope));
  line("rounds", std::to_string(cfg.rounds));
  line("local_epochs", std::to_string(cfg.local_epochs));
  line("learning_rate", format_double(cfg.learning_rate));
  line("lambda_gap", format_double(cfg.lambda_gap));
  line("beta_entropy", format_double(cfg.beta_entropy));
  line("tau_s", format_double(cfg.tau_s));
  line("tau_c", format_double(cfg.tau_c));
  line("m_ema", format_double(cfg.m_ema));
  line("eta_pi", format_double(cfg.eta_pi));
  line("g_max", format_double(cfg.g_max));
  line("n_min", std::to_string(cfg.n_min));
  line("splits.train", format_double(cfg.splits.train));
  line("splits.val", format_double(cfg.splits.val));
  line("splits.test", format_double(cfg.splits.test));
  {
    std::string s;
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
      if (i) s += ',';
      s += std::to_string(cfg.seeds[i]);
    }
    line("seeds", s);
  }
  line("top_n", std::to_string(cfg.top_n));
  return out;
}

std::uint32_t config_hash(const RunConfig& cfg) {
  return fnv1a32(canonical_config_string(cfg));
}

std::uint32_t data_config_hash(const RunConfig& cfg) {
  std::string s;
  append_data_lines(s, cfg);
  return fnv1a32(s);
}

RunConfig default_benchmark_config() {
  RunConfig cfg;
  cfg.data.node_count = 1200;
  cfg.data.class_count = 6;
  cfg.data.p_in = 0.04;
  cfg.data.p_out = 0.004;
  cfg.data.prototype_scale = 1.0;
  cfg.data.noise_std = 0.1;
  cfg.data.mask_drop = 0.0;
  cfg.data.seed = 7;
  cfg.data.client_modality_dims.resize(4);
  for (std::uint32_t k = 0; k < 4; ++k) {
    // Base dims 48 and 32, offset by -8/0/+8 depending on the client.
    const std::int32_t off = (static_cast<std::int32_t>(k % 3) - 1) * 8;
    cfg.data.client_modality_dims[k] = {
        static_cast<std::uint32_t>(48 + off),
        static_cast<std::uint32_t>(32 + off),
    };
  }
  return cfg;
}

}  // namespace stage::sim
