// stage: operator entry point for the simulator. Subcommands gen, train,
// diagnose, report, dump. Stable exit codes: 0 ok, 2 schema violation,
// 3 IO/parse failure, 4 training divergence, 5 config-hash mismatch; every
// failure prints one "ERROR <code> <path>: <message>" line to stderr.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "stage/cli/config_file.hpp"
#include "stage/diag/reports.hpp"
#include "stage/graph/graph.hpp"
#include "stage/num/rng.hpp"
#include "stage/prop/gnn.hpp"
#include "stage/semantics/anchor_bank.hpp"
#include "stage/semantics/translate.hpp"
#include "stage/server/server_state.hpp"
#include "stage/sim/client.hpp"
#include "stage/sim/errors.hpp"
#include "stage/sim/experiment.hpp"
#include "stage/sim/run_config.hpp"
#include "stage/wire/accounting.hpp"
#include "stage/wire/bytes.hpp"
#include "stage/wire/messages.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace stage;

namespace {

constexpr int kExitSchema = 2;
constexpr int kExitIo = 3;
constexpr int kExitDiverged = 4;
constexpr int kExitHash = 5;

int report_error(int code, const std::string& path, const std::string& msg) {
  std::cerr << "ERROR " << code << ' ' << path << ": " << msg << '\n';
  return code;
}

// The path blamed in the error line; commands update it as they move from
// file to file.
struct ErrorContext {
  std::string path;
};

int guarded(ErrorContext& ctx, const std::function<int()>& body) {
  try {
    return body();
  } catch (const cli::ConfigError& e) {
    return report_error(kExitSchema,
                        e.key_path.empty() ? ctx.path : e.key_path, e.what());
  } catch (const sim::HashMismatchError& e) {
    return report_error(kExitHash, ctx.path, e.what());
  } catch (const sim::DivergenceError& e) {
    return report_error(kExitDiverged, ctx.path, e.what());
  } catch (const wire::ParseError& e) {
    return report_error(kExitIo, ctx.path, e.what());
  } catch (const std::invalid_argument& e) {
    return report_error(kExitSchema, ctx.path, e.what());
  } catch (const std::exception& e) {
    return report_error(kExitIo, ctx.path, e.what());
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (!in && !in.eof()) throw std::runtime_error("read failed: " + path);
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

struct ConfigOpts {
  std::string config_path;
  std::vector<std::string> sets;
};

void add_config_opts(CLI::App* cmd, ConfigOpts& opts) {
  cmd->add_option("--config", opts.config_path, "config file path")
      ->required();
  cmd->add_option("--set", opts.sets,
                  "override one key, e.g. --set run.rounds=10");
}

std::string override_key(const std::string& assignment) {
  auto key = assignment.substr(0, assignment.find('='));
  while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) {
    key.pop_back();
  }
  return key;
}

// File, then --set overrides in order, then STAGE_SEED for any seed the
// config left at its default.
sim::RunConfig load_run_config(const ConfigOpts& opts, ErrorContext& ctx) {
  ctx.path = opts.config_path;
  std::vector<std::string> keys;
  auto cfg = cli::parse_config_text(read_text_file(opts.config_path), &keys);
  std::set<std::string> explicit_keys(keys.begin(), keys.end());
  for (const auto& assignment : opts.sets) {
    cli::apply_override(cfg, assignment);
    explicit_keys.insert(override_key(assignment));
  }
  if (const char* env = std::getenv("STAGE_SEED")) {
    char* end = nullptr;
    const auto v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') {
      throw cli::ConfigError("STAGE_SEED",
                             std::string("expected a number, got '") + env +
                                 "'");
    }
    if (!explicit_keys.count("data.seed")) cfg.data.seed = v;
    if (!explicit_keys.count("run.seeds")) cfg.seeds = {v};
  }
  return cfg;
}

std::string hex_hash(std::uint32_t h) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "0x%08x", h);
  return buf;
}

// ---------------------------------------------------------------- gen ----

struct GenOpts {
  ConfigOpts config;
  std::string out_dir = ".";
};

int cmd_gen(const GenOpts& opts, ErrorContext& ctx) {
  auto cfg = load_run_config(opts.config, ctx);
  cfg.validate();
  const auto g = sim::build_dataset(cfg);
  const auto part = sim::partition_dataset(g, cfg);

  ctx.path = opts.out_dir;
  fs::create_directories(opts.out_dir);
  const auto path = (fs::path(opts.out_dir) / "data.mag").string();
  ctx.path = path;
  graph::save_graph(g, path, sim::data_config_hash(cfg));

  std::cout << "wrote " << path << " (" << g.node_count << " nodes, "
            << g.class_count << " classes, " << g.modality_count()
            << " modalities, " << g.edges.size() << " edges)\n";
  std::cout << "partition sizes [";
  std::size_t largest = 0;
  for (std::size_t k = 0; k < part.members.size(); ++k) {
    if (k) std::cout << ", ";
    std::cout << part.members[k].size();
    largest = std::max(largest, part.members[k].size());
  }
  const double balance = static_cast<double>(largest) * part.client_count /
                         g.node_count;
  char bal[32];
  std::snprintf(bal, sizeof(bal), "%.3f", balance);
  std::cout << "], cut " << part.cut_size << ", balance " << bal << '\n';
  std::cout << "data_hash " << hex_hash(sim::data_config_hash(cfg)) << '\n';
  return 0;
}

// -------------------------------------------------------------- train ----

struct TrainOpts {
  ConfigOpts config;
  std::string out_dir;
  std::string data_path;
  std::string method;
  std::int64_t rounds = -1;
  std::int64_t jobs = -1;
};

int cmd_train(const TrainOpts& opts, ErrorContext& ctx) {
  auto cfg = load_run_config(opts.config, ctx);
  if (!opts.method.empty()) cfg.method = sim::method_from_string(opts.method);
  if (opts.rounds >= 0) cfg.rounds = static_cast<std::uint32_t>(opts.rounds);
  if (opts.jobs > 0) cfg.jobs = static_cast<std::uint32_t>(opts.jobs);
  cfg.validate();

  if (!opts.out_dir.empty()) {
    ctx.path = opts.out_dir;
    fs::create_directories(opts.out_dir);
  }

  sim::ExperimentResult res;
  if (!opts.data_path.empty()) {
    ctx.path = opts.data_path;
    auto loaded = graph::load_graph(opts.data_path);
    const auto want = sim::data_config_hash(cfg);
    if (loaded.config_hash != want) {
      throw sim::HashMismatchError(want, loaded.config_hash, "dataset file");
    }
    const auto world =
        sim::build_world_from_graph(std::move(loaded.graph), cfg);
    ctx.path = opts.config.config_path;
    res = sim::run_experiment_on(world, cfg, opts.out_dir);
  } else {
    ctx.path = opts.config.config_path;
    res = sim::run_experiment(cfg, opts.out_dir);
  }

  char line[256];
  std::snprintf(line, sizeof(line),
                "%s %s: final_test %.4f +- %.4f, final_val %.4f +- %.4f (%zu "
                "seeds)\n",
                sim::to_string(cfg.method).c_str(),
                sim::to_string(cfg.task).c_str(), res.mean_test, res.std_test,
                res.mean_val, res.std_val, res.seeds.size());
  std::cout << line;
  std::cout << "config_hash " << hex_hash(res.config_hash) << '\n';
  if (!opts.out_dir.empty()) {
    std::cout << "wrote " << (fs::path(opts.out_dir) / "metrics.csv").string()
              << ", " << (fs::path(opts.out_dir) / "summary.json").string()
              << '\n';
  }
  return 0;
}

// ----------------------------------------------------------- diagnose ----

struct DiagnoseOpts {
  ConfigOpts config;
  std::string checkpoint_path;
  std::string data_path;
  std::string baseline_path;  // optional second checkpoint, "before" side
  std::string out_dir = ".";
};

constexpr std::uint32_t kDriftMinNodes = 5;  // n_cent for centroid cells

struct ClientReportInputs {
  std::vector<num::DenseMatrix> h0;
  std::vector<sim::ClientForward> forward;
  std::vector<std::vector<std::uint32_t>> labels;
};

ClientReportInputs forward_all(const std::vector<sim::ClientState>& clients) {
  ClientReportInputs out;
  for (const auto& c : clients) {
    auto f = sim::client_forward(c);
    out.h0.push_back(f.h0);
    out.forward.push_back(std::move(f));
    out.labels.push_back(c.view.labels);
  }
  return out;
}

// One pooled assignment matrix across clients, rows in client order.
std::pair<num::DenseMatrix, std::vector<std::uint32_t>> pooled_assignments(
    const std::vector<sim::ClientState>& clients,
    const ClientReportInputs& inputs, const semantics::AnchorBank& bank,
    double tau_s) {
  std::size_t total = 0;
  for (const auto& h : inputs.h0) total += h.rows();
  num::DenseMatrix q(total, bank.rows.rows());
  std::vector<std::uint32_t> labels;
  labels.reserve(total);
  std::size_t at = 0;
  for (std::size_t k = 0; k < clients.size(); ++k) {
    const auto a = semantics::translate(inputs.h0[k], bank, tau_s);
    for (std::size_t v = 0; v < a.q.rows(); ++v, ++at) {
      std::copy(a.q.row(v).begin(), a.q.row(v).end(), q.row(at).begin());
    }
    labels.insert(labels.end(), inputs.labels[k].begin(),
                  inputs.labels[k].end());
  }
  return {std::move(q), std::move(labels)};
}

diag::PurityReport pooled_purity(const std::vector<sim::ClientState>& clients,
                                 const ClientReportInputs& inputs,
                                 const sim::RunConfig& cfg,
                                 const semantics::AnchorBank& bank) {
  auto [q, labels] = pooled_assignments(clients, inputs, bank, cfg.tau_s);
  return diag::purity_report(q, labels, cfg.data.class_count, cfg.top_n);
}

double mean_top_purity(const diag::PurityReport& r) {
  if (r.anchors.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& a : r.anchors) sum += a.purity;
  return sum / static_cast<double>(r.anchors.size());
}

int cmd_diagnose(const DiagnoseOpts& opts, ErrorContext& ctx) {
  auto cfg = load_run_config(opts.config, ctx);
  cfg.validate();

  ctx.path = opts.checkpoint_path;
  const auto ckpt = sim::load_checkpoint(opts.checkpoint_path);
  const auto want = sim::config_hash(cfg);
  if (ckpt.config_hash != want) {
    throw sim::HashMismatchError(want, ckpt.config_hash, "checkpoint");
  }

  ctx.path = opts.data_path;
  auto loaded = graph::load_graph(opts.data_path);
  const auto want_data = sim::data_config_hash(cfg);
  if (loaded.config_hash != want_data) {
    throw sim::HashMismatchError(want_data, loaded.config_hash,
                                 "dataset file");
  }
  const auto world = sim::build_world_from_graph(std::move(loaded.graph), cfg);

  ctx.path = opts.checkpoint_path;
  const auto st = sim::resume_sim_state(world, cfg, ckpt);
  const auto inputs = forward_all(st.clients);

  ordered_json header;
  header["config_hash"] = want;
  header["data_hash"] = want_data;
  header["seed"] = ckpt.seed;
  header["round"] = ckpt.round;

  ctx.path = opts.out_dir;
  fs::create_directories(opts.out_dir);

  // Drift: fused layer-0 embeddings against the final propagation layer.
  const auto layers = cfg.gnn_layers;
  std::vector<num::DenseMatrix> last;
  for (const auto& f : inputs.forward) last.push_back(f.trace.output());
  const auto drift0 =
      diag::centroid_drift(inputs.h0, inputs.labels, kDriftMinNodes, "layer0");
  const auto driftL = diag::centroid_drift(
      last, inputs.labels, kDriftMinNodes, "layer" + std::to_string(layers));
  {
    ordered_json j = header;
    j["layer0"] = ordered_json::parse(diag::to_json(drift0));
    j["layer" + std::to_string(layers)] =
        ordered_json::parse(diag::to_json(driftL));
    if (!drift0.empty && !driftL.empty) {
      j["growth"] =
          ordered_json::parse(diag::to_json(diag::drift_growth(drift0, driftL)));
    }
    const auto path = (fs::path(opts.out_dir) / "drift.json").string();
    ctx.path = path;
    write_text_file(path, j.dump(2) + "\n");
    std::cout << "wrote " << path << '\n';
  }

  // Purity of the pooled anchor assignments; the optional baseline
  // checkpoint is the "before" side of the delta.
  {
    const auto purity = pooled_purity(st.clients, inputs, cfg, *world.bank);
    ordered_json j = header;
    j["mean_top_purity"] = mean_top_purity(purity);
    j["report"] = ordered_json::parse(diag::to_json(purity));
    if (!opts.baseline_path.empty()) {
      ctx.path = opts.baseline_path;
      const auto base = sim::load_checkpoint(opts.baseline_path);
      if (base.data_hash != want_data) {
        throw sim::HashMismatchError(want_data, base.data_hash,
                                     "baseline checkpoint");
      }
      auto base_clients = sim::make_clients(world, cfg, base.seed);
      if (base_clients.size() != base.client_params.size()) {
        throw std::invalid_argument(
            "baseline checkpoint client count does not match");
      }
      for (std::size_t k = 0; k < base_clients.size(); ++k) {
        base_clients[k].params = base.client_params[k];
        base_clients[k].last_tau = base.client_taus[k];
      }
      const auto base_inputs = forward_all(base_clients);
      const auto base_purity =
          pooled_purity(base_clients, base_inputs, cfg, *world.bank);
      j["baseline_mean_top_purity"] = mean_top_purity(base_purity);
      j["baseline_report"] = ordered_json::parse(diag::to_json(base_purity));
      j["delta"] = ordered_json::parse(
          diag::to_json(diag::purity_delta(base_purity, purity)));
    }
    const auto path = (fs::path(opts.out_dir) / "purity.json").string();
    ctx.path = path;
    write_text_file(path, j.dump(2) + "\n");
    std::cout << "wrote " << path << '\n';
  }

  // Attention calibration per propagation layer, pooled over clients by
  // offsetting local node ids.
  {
    ordered_json layer_reports = ordered_json::array();
    for (std::uint32_t l = 0; l < layers; ++l) {
      std::vector<double> weights;
      std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
      std::vector<std::uint32_t> labels;
      std::uint32_t base = 0;
      for (std::size_t k = 0; k < st.clients.size(); ++k) {
        const auto ea = diag::collect_attention(
            st.clients[k].adj, inputs.forward[k].trace.layers[l].alpha);
        for (std::size_t i = 0; i < ea.edges.size(); ++i) {
          edges.emplace_back(ea.edges[i].first + base,
                             ea.edges[i].second + base);
          weights.push_back(ea.weights[i]);
        }
        labels.insert(labels.end(), inputs.labels[k].begin(),
                      inputs.labels[k].end());
        base += st.clients[k].view.node_count;
      }
      auto rep = diag::attention_calibration(weights, edges, labels);
      ordered_json e = ordered_json::parse(diag::to_json(rep));
      e["layer"] = l;
      layer_reports.push_back(std::move(e));
    }
    ordered_json j = header;
    j["layers"] = std::move(layer_reports);
    const auto path = (fs::path(opts.out_dir) / "calibration.json").string();
    ctx.path = path;
    write_text_file(path, j.dump(2) + "\n");
    std::cout << "wrote " << path << '\n';
  }

  // Dirichlet energy of every embedding layer over the local edges.
  {
    ordered_json layer_reports = ordered_json::array();
    for (std::uint32_t l = 0; l <= layers; ++l) {
      ordered_json per_client = ordered_json::array();
      double sum = 0.0;
      for (std::size_t k = 0; k < st.clients.size(); ++k) {
        const double e = prop::dirichlet_energy(
            inputs.forward[k].trace.embedding(l), st.clients[k].view.edges);
        per_client.push_back(e);
        sum += e;
      }
      ordered_json e;
      e["layer"] = l;
      e["per_client"] = std::move(per_client);
      e["mean"] = sum / static_cast<double>(st.clients.size());
      layer_reports.push_back(std::move(e));
    }
    ordered_json j = header;
    j["layers"] = std::move(layer_reports);
    const auto path = (fs::path(opts.out_dir) / "energy.json").string();
    ctx.path = path;
    write_text_file(path, j.dump(2) + "\n");
    std::cout << "wrote " << path << '\n';
  }
  return 0;
}

// ------------------------------------------------------------- report ----

struct ReportOpts {
  std::vector<std::string> run_dirs;
  std::string out_path;  // empty: stdout
};

std::string pct(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", fraction * 100.0);
  return buf;
}

int cmd_report(const ReportOpts& opts, ErrorContext& ctx) {
  std::string csv =
      "run,method,task,config_hash,seed,final_val_pct,final_test_pct\n";
  std::set<std::string> tasks;
  for (const auto& dir : opts.run_dirs) {
    const auto path = (fs::path(dir) / "summary.json").string();
    ctx.path = path;
    ordered_json j;
    try {
      j = ordered_json::parse(read_text_file(path));
    } catch (const nlohmann::json::parse_error& e) {
      throw std::runtime_error(std::string("invalid summary: ") + e.what());
    }
    const std::string method = j.at("config").at("method");
    const std::string task = j.at("config").at("task");
    tasks.insert(task);
    const auto hash = j.at("config_hash").get<std::uint32_t>();
    const std::string prefix = dir + ',' + method + ',' + task + ',' +
                               std::to_string(hash) + ',';
    for (const auto& s : j.at("seeds")) {
      csv += prefix + std::to_string(s.at("seed").get<std::uint64_t>()) + ',' +
             pct(s.at("final_val").get<double>()) + ',' +
             pct(s.at("final_test").get<double>()) + '\n';
    }
    csv += prefix + "mean," +
           pct(j.at("final_val").at("mean").get<double>()) + " +- " +
           pct(j.at("final_val").at("std").get<double>()) + ',' +
           pct(j.at("final_test").at("mean").get<double>()) + " +- " +
           pct(j.at("final_test").at("std").get<double>()) + '\n';
  }
  if (tasks.size() > 1) {
    std::cerr << "warning: runs mix tasks; rows are not comparable across "
                 "tasks\n";
  }
  if (opts.out_path.empty()) {
    std::cout << csv;
  } else {
    ctx.path = opts.out_path;
    write_text_file(opts.out_path, csv);
    std::cout << "wrote " << opts.out_path << '\n';
  }
  return 0;
}

// --------------------------------------------------------------- dump ----

ordered_json param_shapes(const num::ParamStore& store) {
  ordered_json shapes;
  for (const auto& [name, entry] : store) {
    shapes[name] = {entry.value.rows(), entry.value.cols()};
  }
  return shapes;
}

int cmd_dump(const std::string& path, ErrorContext& ctx) {
  ctx.path = path;
  const auto bytes = wire::read_file(path);
  if (bytes.size() < 4) throw wire::ParseError(0, "file too short for magic");
  const std::string magic(bytes.begin(), bytes.begin() + 4);
  ordered_json j;
  j["file"] = path;
  j["magic"] = magic;
  if (magic == "MAG1") {
    const auto lg = graph::load_graph(path);
    const auto& g = lg.graph;
    j["config_hash"] = lg.config_hash;
    j["node_count"] = g.node_count;
    j["class_count"] = g.class_count;
    ordered_json mods = ordered_json::array();
    for (std::size_t c = 0; c < g.modalities.size(); ++c) {
      std::uint64_t avail = 0;
      for (std::uint32_t v = 0; v < g.node_count; ++v) {
        avail += g.mask(v, static_cast<std::uint32_t>(c)) ? 1 : 0;
      }
      mods.push_back({{"id", g.modalities[c].id},
                      {"dim", g.modalities[c].dim},
                      {"available", avail}});
    }
    j["modalities"] = std::move(mods);
    j["edge_count"] = g.edges.size();
    std::vector<std::uint64_t> hist(g.class_count, 0);
    for (auto y : g.labels) ++hist[y];
    j["label_histogram"] = hist;
  } else if (magic == "ANB1") {
    const auto lb = semantics::load_bank(path);
    j["config_hash"] = lb.config_hash;
    j["anchor_count"] = lb.bank.rows.rows();
    j["protocol_dim"] = lb.bank.rows.cols();
    j["bank_hash"] = semantics::bank_hash(lb.bank);
  } else if (magic == "SRV1") {
    const auto ls = server::load_server_state(path);
    j["config_hash"] = ls.config_hash;
    j["round"] = ls.state.round;
    j["anchor_count"] = ls.state.gap.rows.rows();
    j["protocol_dim"] = ls.state.gap.rows.cols();
    j["m_ema"] = ls.state.m_ema;
    j["eta_pi"] = ls.state.eta_pi;
    j["controller_params"] = param_shapes(ls.state.controller.params);
  } else if (magic == "CKP1") {
    const auto ck = sim::load_checkpoint(path);
    j["config_hash"] = ck.config_hash;
    j["data_hash"] = ck.data_hash;
    j["seed"] = ck.seed;
    j["round"] = ck.round;
    j["has_shared"] = ck.has_shared;
    if (ck.has_shared) j["shared_params"] = param_shapes(ck.shared);
    ordered_json clients = ordered_json::array();
    for (std::size_t k = 0; k < ck.client_ids.size(); ++k) {
      clients.push_back({{"id", ck.client_ids[k]},
                         {"last_tau", ck.client_taus[k]},
                         {"params", param_shapes(ck.client_params[k])},
                         {"scalars", ck.client_params[k].total_params()}});
    }
    j["clients"] = std::move(clients);
  } else if (magic == "STG1") {
    const auto type = wire::peek_type(bytes);
    if (type == wire::MessageType::client_upload) {
      const auto up = wire::deserialize_upload(bytes);
      j["type"] = "client_upload";
      j["client_id"] = up.client_id;
      j["round"] = up.round;
      j["active_anchors"] = up.anchor_ids.size();
      j["anchor_ids"] = up.anchor_ids;
      j["counts"] = up.counts;
      j["mean_dim"] = up.mean_dim;
      j["sketch_mean"] = up.sketch_mean;
      j["sketch_std"] = up.sketch_std;
      j["meta_gradient"] = up.meta_gradient;
      j["scalars_full"] =
          wire::count_scalars(up, wire::AccountingMode::full).total;
      j["scalars_gap_only"] =
          wire::count_scalars(up, wire::AccountingMode::gap_only).total;
    } else {
      const auto br = wire::deserialize_broadcast(bytes);
      j["type"] = "server_broadcast";
      j["round"] = br.round;
      j["anchor_count"] = br.anchor_count;
      j["protocol_dim"] = br.protocol_dim;
      j["controller_param_count"] = br.controller_params.size();
      j["config_hash"] = br.config_hash;
      j["scalars_full"] =
          wire::count_scalars(br, wire::AccountingMode::full).total;
      j["scalars_gap_only"] =
          wire::count_scalars(br, wire::AccountingMode::gap_only).total;
    }
  } else {
    throw wire::ParseError(0, "unknown magic '" + magic + "'");
  }
  std::cout << j.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"STAGE federated graph learning simulator"};
  app.require_subcommand(1);

  GenOpts gen;
  auto* gen_cmd = app.add_subcommand(
      "gen", "generate, partition and perturb a dataset file");
  add_config_opts(gen_cmd, gen.config);
  gen_cmd->add_option("--out", gen.out_dir, "output directory");

  TrainOpts train;
  auto* train_cmd =
      app.add_subcommand("train", "run the federated experiment");
  add_config_opts(train_cmd, train.config);
  train_cmd->add_option("--out", train.out_dir,
                        "output directory for metrics and checkpoints");
  train_cmd->add_option("--data", train.data_path,
                        "dataset file (default: generate from config)");
  train_cmd->add_option("--method", train.method, "override run.method");
  train_cmd->add_option("--rounds", train.rounds, "override run.rounds");
  train_cmd->add_option("--jobs", train.jobs, "override run.jobs");

  DiagnoseOpts diag_opts;
  auto* diag_cmd = app.add_subcommand(
      "diagnose", "emit drift, purity, calibration and energy reports");
  add_config_opts(diag_cmd, diag_opts.config);
  diag_cmd->add_option("--checkpoint", diag_opts.checkpoint_path,
                       "checkpoint to analyze")
      ->required();
  diag_cmd->add_option("--data", diag_opts.data_path, "dataset file")
      ->required();
  diag_cmd->add_option("--baseline", diag_opts.baseline_path,
                       "baseline checkpoint, the before side of the delta");
  diag_cmd->add_option("--out", diag_opts.out_dir, "output directory");

  ReportOpts report;
  auto* report_cmd =
      app.add_subcommand("report", "merge run summaries into one CSV table");
  report_cmd->add_option("dirs", report.run_dirs, "run directories")
      ->required();
  report_cmd->add_option("--out", report.out_path,
                         "output file (default: stdout)");

  std::string dump_path;
  auto* dump_cmd =
      app.add_subcommand("dump", "pretty-print any stage binary file");
  dump_cmd->add_option("file", dump_path, "file to inspect")->required();

  CLI11_PARSE(app, argc, argv);

  ErrorContext ctx;
  if (gen_cmd->parsed()) {
    return guarded(ctx, [&] { return cmd_gen(gen, ctx); });
  }
  if (train_cmd->parsed()) {
    return guarded(ctx, [&] { return cmd_train(train, ctx); });
  }
  if (diag_cmd->parsed()) {
    return guarded(ctx, [&] { return cmd_diagnose(diag_opts, ctx); });
  }
  if (report_cmd->parsed()) {
    return guarded(ctx, [&] { return cmd_report(report, ctx); });
  }
  return guarded(ctx, [&] { return cmd_dump(dump_path, ctx); });
}
