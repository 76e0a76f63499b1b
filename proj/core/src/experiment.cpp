#include "stage/sim/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <utility>

#include "json.hpp"
#include "stage/sim/errors.hpp"
#include "stage/wire/accounting.hpp"
#include "stage/wire/params.hpp"

namespace stage::sim {

namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

double weighted_eval(const std::vector<ClientState>& clients,
                     const RunConfig& cfg, graph::Split split) {
  double num = 0.0;
  std::uint64_t den = 0;
  for (const auto& c : clients) {
    try {
      const auto r = evaluate_task(c, cfg, split);
      num += r.metric * r.count;
      den += r.count;
    } catch (const UndefinedMetricError&) {
    }
  }
  return den ? num / den
             : std::numeric_limits<double>::quiet_NaN();
}

ordered_json config_to_json(const RunConfig& cfg) {
  ordered_json j;
  j["method"] = to_string(cfg.method);
  j["task"] = to_string(cfg.task);
  j["partition"] = to_string(cfg.partition);
  ordered_json data;
  data["node_count"] = cfg.data.node_count;
  data["class_count"] = cfg.data.class_count;
  data["p_in"] = cfg.data.p_in;
  data["p_out"] = cfg.data.p_out;
  data["prototype_scale"] = cfg.data.prototype_scale;
  data["noise_std"] = cfg.data.noise_std;
  data["mask_drop"] = cfg.data.mask_drop;
  data["seed"] = cfg.data.seed;
  data["client_modality_dims"] = cfg.data.client_modality_dims;
  j["data"] = std::move(data);
  j["anchor_count"] = cfg.anchor_count;
  j["protocol_dim"] = cfg.protocol_dim;
  j["gnn_hidden"] = cfg.gnn_hidden;
  j["gnn_layers"] = cfg.gnn_layers;
  j["leaky_slope"] = cfg.leaky_slope;
  j["rounds"] = cfg.rounds;
  j["local_epochs"] = cfg.local_epochs;
  j["learning_rate"] = cfg.learning_rate;
  j["lambda_gap"] = cfg.lambda_gap;
  j["beta_entropy"] = cfg.beta_entropy;
  j["tau_s"] = cfg.tau_s;
  j["tau_c"] = cfg.tau_c;
  j["m_ema"] = cfg.m_ema;
  j["eta_pi"] = cfg.eta_pi;
  j["g_max"] = cfg.g_max;
  j["n_min"] = cfg.n_min;
  j["drift_alpha"] = cfg.drift_alpha;
  j["noise_ratio"] = cfg.noise_ratio;
  j["splits"] = {{"train", cfg.splits.train},
                 {"val", cfg.splits.val},
                 {"test", cfg.splits.test}};
  j["seeds"] = cfg.seeds;
  j["top_n"] = cfg.top_n;
  return j;
}

}  // namespace

void save_checkpoint(const std::string& path, const SimState& st,
                     const RunConfig& cfg, std::uint64_t seed) {
  const std::uint32_t hash = config_hash(cfg);
  wire::ByteWriter w;
  w.magic("CKP1");
  w.u32(1);  // version
  w.u32(hash);
  w.u32(data_config_hash(cfg));
  w.u64(seed);
  w.u32(st.server.round);
  server::write_server_state(w, st.server, hash);
  const bool has_shared = st.shared.entry_count() > 0;
  w.u8(has_shared ? 1 : 0);
  if (has_shared) wire::write_param_store(w, st.shared);
  w.u32(static_cast<std::uint32_t>(st.clients.size()));
  for (const auto& c : st.clients) {
    w.u32(c.id);
    w.f64(c.last_tau);
    wire::write_param_store(w, c.params);
  }
  wire::write_file(path, w.buffer());
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  const auto data = wire::read_file(path);
  wire::ByteReader r(data);
  r.expect_magic("CKP1");
  const std::uint32_t version = r.u32();
  if (version != 1) {
    throw wire::ParseError(r.offset() - 4,
                           "unsupported CKP1 version " + std::to_string(version));
  }
  LoadedCheckpoint out;
  out.config_hash = r.u32();
  out.data_hash = r.u32();
  out.seed = r.u64();
  out.round = r.u32();
  const auto loaded = server::read_server_state(r);
  out.server = loaded.state;
  if (loaded.config_hash != out.config_hash) {
    throw wire::ParseError(r.offset(),
                           "embedded server state hash disagrees");
  }
  out.has_shared = r.u8() != 0;
  if (out.has_shared) out.shared = wire::read_param_store(r);
  const std::uint32_t count = r.u32();
  out.client_ids.resize(count);
  out.client_taus.resize(count);
  out.client_params.resize(count);
  for (std::uint32_t k = 0; k < count; ++k) {
    out.client_ids[k] = r.u32();
    out.client_taus[k] = r.f64();
    out.client_params[k] = wire::read_param_store(r);
  }
  r.expect_end();
  return out;
}

SimState resume_sim_state(const World& world, const RunConfig& cfg,
                          const LoadedCheckpoint& ckpt) {
  const std::uint32_t expect = config_hash(cfg);
  if (ckpt.config_hash != expect) {
    throw HashMismatchError(expect, ckpt.config_hash, "checkpoint");
  }
  SimState st = init_sim_state(world, cfg, ckpt.seed);
  if (ckpt.client_ids.size() != st.clients.size()) {
    throw std::invalid_argument("checkpoint client count does not match");
  }
  st.server = ckpt.server;
  for (std::size_t k = 0; k < st.clients.size(); ++k) {
    if (ckpt.client_ids[k] != st.clients[k].id) {
      throw std::invalid_argument("checkpoint client ids do not match");
    }
    st.clients[k].params = ckpt.client_params[k];
    st.clients[k].last_tau = ckpt.client_taus[k];
  }
  if (ckpt.has_shared != method_shares_params(cfg.method)) {
    throw std::invalid_argument(
        "checkpoint sharing mode does not match method");
  }
  if (ckpt.has_shared) st.shared = ckpt.shared;
  return st;
}

SeedRunOutput run_seed(const World& world, const RunConfig& cfg,
                       std::uint64_t seed, const std::string& checkpoint_dir,
                       const LoadedCheckpoint* resume) {
  if (resume && resume->seed != seed) {
    throw std::invalid_argument("checkpoint seed does not match run seed");
  }
  SimState st = resume ? resume_sim_state(world, cfg, *resume)
                       : init_sim_state(world, cfg, seed);
  if (st.server.round > cfg.rounds) {
    throw std::invalid_argument("checkpoint is beyond the configured rounds");
  }

  SeedRunOutput out;
  out.seed = seed;
  while (st.server.round < cfg.rounds) {
    auto rm = run_round(st, cfg);
    const std::uint32_t done = st.server.round;
    if (!checkpoint_dir.empty() &&
        ((cfg.checkpoint_every != 0 && done % cfg.checkpoint_every == 0) ||
         done == cfg.rounds)) {
      save_checkpoint(checkpoint_dir + "/ckpt_seed" + std::to_string(seed) +
                          "_round" + std::to_string(done) + ".bin",
                      st, cfg, seed);
    }
    out.rounds.push_back(std::move(rm));
  }
  if (!out.rounds.empty()) {
    out.final_val = out.rounds.back().val_metric;
    out.final_test = out.rounds.back().test_metric;
  } else {
    out.final_val = weighted_eval(st.clients, cfg, graph::Split::Val);
    out.final_test = weighted_eval(st.clients, cfg, graph::Split::Test);
  }
  out.final_state = std::move(st);
  return out;
}

ExperimentResult run_experiment(const RunConfig& cfg,
                                const std::string& out_dir) {
  cfg.validate();
  return run_experiment_on(build_world(cfg), cfg, out_dir);
}

ExperimentResult run_experiment_on(const World& world, const RunConfig& cfg,
                                   const std::string& out_dir) {
  cfg.validate();
  ExperimentResult res;
  res.config_hash = config_hash(cfg);

  std::string ckpt_dir;
  if (!out_dir.empty()) {
    fs::create_directories(fs::path(out_dir) / "checkpoints");
    ckpt_dir = (fs::path(out_dir) / "checkpoints").string();
  }
  for (std::uint64_t seed : cfg.seeds) {
    auto run = run_seed(world, cfg, seed, ckpt_dir);
    res.seeds.push_back({seed, run.final_val, run.final_test});
    res.rounds_per_seed.push_back(std::move(run.rounds));
  }

  const auto n = static_cast<double>(res.seeds.size());
  double sv = 0.0, st = 0.0;
  for (const auto& s : res.seeds) {
    sv += s.final_val;
    st += s.final_test;
  }
  res.mean_val = sv / n;
  res.mean_test = st / n;
  if (res.seeds.size() > 1) {
    double vv = 0.0, vt = 0.0;
    for (const auto& s : res.seeds) {
      vv += (s.final_val - res.mean_val) * (s.final_val - res.mean_val);
      vt += (s.final_test - res.mean_test) * (s.final_test - res.mean_test);
    }
    res.std_val = std::sqrt(vv / (n - 1.0));
    res.std_test = std::sqrt(vt / (n - 1.0));
  }

  if (!out_dir.empty()) {
    write_text_file((fs::path(out_dir) / "metrics.csv").string(),
                    render_metrics_csv(res));
    write_text_file((fs::path(out_dir) / "summary.json").string(),
                    render_summary_json(cfg, res));
  }
  return res;
}

std::string render_metrics_csv(const ExperimentResult& result) {
  std::string out =
      "config_hash,seed,round,client,task_loss,gap_loss,entropy_loss,tau,"
      "meta_gradient,val_metric,test_metric,upload_full,download_full,"
      "upload_gap_only,download_gap_only\n";
  const std::string hash = std::to_string(result.config_hash) + ',';
  for (std::size_t s = 0; s < result.seeds.size(); ++s) {
    const auto seed = result.seeds[s].seed;
    for (const auto& rm : result.rounds_per_seed[s]) {
      for (const auto& c : rm.clients) {
        out += hash + std::to_string(seed) + ',' + std::to_string(rm.round) +
               ',' +
               std::to_string(c.client_id) + ',' + fmt(c.task_loss) + ',' +
               fmt(c.gap_loss) + ',' + fmt(c.entropy_loss) + ',' +
               fmt(c.tau) + ',' + fmt(c.meta_gradient) + ',' +
               fmt(c.val_metric) + ',' + fmt(c.test_metric) + ',' +
               std::to_string(c.upload_full) + ',' +
               std::to_string(c.download_full) + ',' +
               std::to_string(c.upload_gap_only) + ',' +
               std::to_string(c.download_gap_only) + '\n';
      }
      out += hash + std::to_string(seed) + ',' + std::to_string(rm.round) +
             ",server," + fmt(rm.mean_task_loss) + ',' +
             fmt(rm.mean_gap_loss) + ',' + fmt(rm.mean_entropy_loss) + ',' +
             fmt(rm.mean_tau) + ',' + fmt(rm.mean_meta_gradient) + ',' +
             fmt(rm.val_metric) + ',' + fmt(rm.test_metric) + ',' +
             std::to_string(rm.upload_full) + ',' +
             std::to_string(rm.download_full) + ',' +
             std::to_string(rm.upload_gap_only) + ',' +
             std::to_string(rm.download_gap_only) + '\n';
    }
  }
  return out;
}

std::string render_summary_json(const RunConfig& cfg,
                                const ExperimentResult& result) {
  ordered_json j;
  j["schema"] = "stage.summary.v1";
  j["config_hash"] = result.config_hash;
  j["data_hash"] = data_config_hash(cfg);
  j["config"] = config_to_json(cfg);
  ordered_json seeds = ordered_json::array();
  for (std::size_t s = 0; s < result.seeds.size(); ++s) {
    ordered_json e;
    e["seed"] = result.seeds[s].seed;
    e["final_val"] = result.seeds[s].final_val;
    e["final_test"] = result.seeds[s].final_test;
    e["rounds"] = result.rounds_per_seed[s].empty()
                      ? 0
                      : result.rounds_per_seed[s].back().round + 1;
    seeds.push_back(std::move(e));
  }
  j["seeds"] = std::move(seeds);
  j["final_val"] = {{"mean", result.mean_val}, {"std", result.std_val}};
  j["final_test"] = {{"mean", result.mean_test}, {"std", result.std_test}};

  if (!result.rounds_per_seed.empty() &&
      !result.rounds_per_seed.front().empty()) {
    const auto& last = result.rounds_per_seed.front().back();
    std::uint64_t up_full = 0, up_gap = 0;
    for (const auto& c : last.clients) {
      up_full = std::max(up_full, c.upload_full);
      up_gap = std::max(up_gap, c.upload_gap_only);
    }
    const std::uint64_t down_full = last.clients.front().download_full;
    const std::uint64_t down_gap = last.clients.front().download_gap_only;
    ordered_json p;
    p["upload_full_max"] = up_full;
    p["download_full"] = down_full;
    p["upload_gap_only_max"] = up_gap;
    p["download_gap_only"] = down_gap;
    p["ratio_full_vs_1m"] = wire::payload_ratio(1000000, up_full, down_full);
    j["payload"] = std::move(p);
  }
  return j.dump(2) + "\n";
}

}  // namespace stage::sim
