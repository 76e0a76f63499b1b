#include "stage/sim/round.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <stdexcept>
#include <thread>
#include <utility>

#include "stage/num/errors.hpp"
#include "stage/num/rng.hpp"
#include "stage/server/aggregate.hpp"
#include "stage/sim/errors.hpp"
#include "stage/wire/accounting.hpp"
#include "stage/wire/params.hpp"

namespace stage::sim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Runs fn(k) for each client index over `jobs` threads. Exceptions are
// re-thrown for the lowest failing index so errors are schedule-independent.
void parallel_for_clients(std::size_t count, std::uint32_t jobs,
                          const std::function<void(std::size_t)>& fn) {
  if (jobs <= 1 || count <= 1) {
    for (std::size_t k = 0; k < count; ++k) fn(k);
    return;
  }
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  const std::uint32_t n_threads = std::min<std::uint32_t>(
      jobs, static_cast<std::uint32_t>(count));
  pool.reserve(n_threads);
  for (std::uint32_t t = 0; t < n_threads; ++t) {
    pool.emplace_back([&, t]() {
      for (std::size_t k = t; k < count; k += n_threads) {
        try {
          fn(k);
        } catch (...) {
          errors[k] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

num::ParamStore extract_subset(const num::ParamStore& params,
                               const std::vector<std::string>& names) {
  num::ParamStore out;
  for (const auto& name : names) {
    const auto& src = params.value(name);
    out.create(name, src.rows(), src.cols()) = src;
  }
  return out;
}

void install_params(num::ParamStore& dst, const num::ParamStore& src) {
  for (const auto& [name, entry] : src) {
    auto& target = dst.value(name);
    if (!target.same_shape(entry.value)) {
      throw std::invalid_argument("shape mismatch installing " + name);
    }
    target = entry.value;
  }
}

double train_weight(const ClientState& c, const RunConfig& cfg) {
  return cfg.task == Task::node_classification
             ? static_cast<double>(c.train_nodes.size())
             : static_cast<double>(c.train_edges.size());
}

void fill_eval(ClientRoundMetrics& m, const ClientState& c,
               const RunConfig& cfg) {
  // A committed model whose forward pass overflows has no defined metric
  // either, so NonFiniteError degrades to NaN the same way.
  try {
    const auto val = evaluate_task(c, cfg, graph::Split::Val);
    m.val_metric = val.metric;
    m.val_count = val.count;
  } catch (const UndefinedMetricError&) {
    m.val_metric = kNaN;
    m.val_count = 0;
  } catch (const num::NonFiniteError&) {
    m.val_metric = kNaN;
    m.val_count = 0;
  }
  try {
    const auto test = evaluate_task(c, cfg, graph::Split::Test);
    m.test_metric = test.metric;
    m.test_count = test.count;
  } catch (const UndefinedMetricError&) {
    m.test_metric = kNaN;
    m.test_count = 0;
  } catch (const num::NonFiniteError&) {
    m.test_metric = kNaN;
    m.test_count = 0;
  }
}

void aggregate_metrics(RoundMetrics& rm) {
  double val_num = 0.0, test_num = 0.0;
  std::uint64_t val_den = 0, test_den = 0;
  double task = 0.0, gap = 0.0, ent = 0.0, tau = 0.0, g = 0.0;
  for (const auto& c : rm.clients) {
    if (c.val_count > 0) {
      val_num += c.val_metric * c.val_count;
      val_den += c.val_count;
    }
    if (c.test_count > 0) {
      test_num += c.test_metric * c.test_count;
      test_den += c.test_count;
    }
    task += c.task_loss;
    gap += c.gap_loss;
    ent += c.entropy_loss;
    tau += c.tau;
    g += c.meta_gradient;
    rm.upload_full += c.upload_full;
    rm.download_full += c.download_full;
    rm.upload_gap_only += c.upload_gap_only;
    rm.download_gap_only += c.download_gap_only;
  }
  const auto n = static_cast<double>(rm.clients.size());
  rm.val_metric = val_den ? val_num / val_den : kNaN;
  rm.test_metric = test_den ? test_num / test_den : kNaN;
  rm.mean_task_loss = task / n;
  rm.mean_gap_loss = gap / n;
  rm.mean_entropy_loss = ent / n;
  rm.mean_tau = tau / n;
  rm.mean_meta_gradient = g / n;
}

RoundMetrics run_round_stage(SimState& st, const RunConfig& cfg) {
  const std::uint32_t round = st.server.round;
  RoundMetrics rm;
  rm.round = round;

  wire::ServerBroadcast bc;
  bc.round = round;
  bc.anchor_count =
      static_cast<std::uint32_t>(st.server.gap.rows.rows());
  bc.protocol_dim = static_cast<std::uint32_t>(st.server.gap.rows.cols());
  bc.prototypes = quantize(st.server.gap.rows);
  bc.controller_params = server::flatten_controller(st.server.controller);
  bc.config_hash = config_hash(cfg);
  const auto bc_bytes = wire::serialize(bc);

  std::vector<ClientState> staged = st.clients;
  std::vector<LocalTrainResult> results(staged.size());
  std::vector<std::vector<std::uint8_t>> upload_bytes(staged.size());
  parallel_for_clients(staged.size(), cfg.jobs, [&](std::size_t k) {
    const auto decoded = wire::deserialize_broadcast(bc_bytes);
    results[k] = local_train_stage(staged[k], decoded, cfg);
    upload_bytes[k] = wire::serialize(results[k].upload);
  });

  const auto down_full =
      wire::count_scalars(bc, wire::AccountingMode::full).total;
  const auto down_gap =
      wire::count_scalars(bc, wire::AccountingMode::gap_only).total;

  std::vector<server::GapUpload> gap_uploads;
  std::vector<server::MetaReport> reports;
  rm.clients.resize(staged.size());
  for (std::size_t k = 0; k < staged.size(); ++k) {
    const auto up = wire::deserialize_upload(upload_bytes[k]);
    if (up.round != round) {
      throw std::invalid_argument("upload round does not match server round");
    }
    semantics::AnchorStats stats;
    stats.anchor_ids = up.anchor_ids;
    stats.means = dequantize(up.means, up.anchor_ids.size(), up.mean_dim);
    stats.counts = up.counts;
    gap_uploads.push_back({up.client_id, std::move(stats)});
    reports.push_back(
        {up.client_id, {up.sketch_mean, up.sketch_std}, up.meta_gradient});

    auto& m = rm.clients[k];
    m.client_id = up.client_id;
    m.task_loss = results[k].task_loss;
    m.gap_loss = results[k].gap_loss;
    m.entropy_loss = results[k].entropy_loss;
    m.tau = results[k].tau;
    m.meta_gradient = results[k].meta_gradient;
    m.upload_full = wire::count_scalars(up, wire::AccountingMode::full).total;
    m.upload_gap_only =
        wire::count_scalars(up, wire::AccountingMode::gap_only).total;
    m.download_full = down_full;
    m.download_gap_only = down_gap;
  }

  auto next_gap = server::update_gap(st.server.gap, std::move(gap_uploads),
                                     st.server.m_ema);
  next_gap.round = round + 1;
  auto next_controller = st.server.controller;
  if (method_uses_meta(cfg.method)) {
    server::meta_update(next_controller, std::move(reports), st.server.eta_pi,
                        cfg.g_max);
  }

  // Commit point: nothing above mutated st.
  st.server.gap = std::move(next_gap);
  st.server.controller = std::move(next_controller);
  st.server.round = round + 1;
  st.clients = std::move(staged);

  for (std::size_t k = 0; k < st.clients.size(); ++k) {
    fill_eval(rm.clients[k], st.clients[k], cfg);
  }
  aggregate_metrics(rm);
  return rm;
}

RoundMetrics run_round_fedavg(SimState& st, const RunConfig& cfg) {
  const std::uint32_t round = st.server.round;
  RoundMetrics rm;
  rm.round = round;

  wire::ByteWriter w;
  wire::write_param_store(w, st.shared);
  const auto blob = w.take();
  const std::uint64_t shared_count = st.shared.total_params();
  const auto names = shared_param_names(st.clients);

  std::vector<ClientState> staged = st.clients;
  std::vector<LocalTrainResult> results(staged.size());
  std::vector<std::vector<std::uint8_t>> upload_bytes(staged.size());
  parallel_for_clients(staged.size(), cfg.jobs, [&](std::size_t k) {
    wire::ByteReader r(blob);
    const auto incoming = wire::read_param_store(r);
    r.expect_end();
    install_params(staged[k].params, incoming);
    results[k] = local_train_task_only(staged[k], cfg, round);
    wire::ByteWriter wk;
    wire::write_param_store(wk, extract_subset(staged[k].params, names));
    upload_bytes[k] = wk.take();
  });

  std::vector<num::ParamStore> decoded(staged.size());
  std::vector<double> weights(staged.size());
  double weight_total = 0.0;
  for (std::size_t k = 0; k < staged.size(); ++k) {
    wire::ByteReader r(upload_bytes[k]);
    decoded[k] = wire::read_param_store(r);
    r.expect_end();
    weights[k] = train_weight(staged[k], cfg);
    weight_total += weights[k];
  }
  if (weight_total <= 0.0) {
    throw std::invalid_argument("no training data on any client");
  }
  std::vector<const num::ParamStore*> ptrs;
  for (const auto& d : decoded) ptrs.push_back(&d);
  for (auto& wgt : weights) wgt /= weight_total;
  auto next_shared = server::aggregate_fedavg(ptrs, weights);

  // The deployed model is the aggregate: install before evaluation.
  for (auto& c : staged) install_params(c.params, next_shared);

  st.shared = std::move(next_shared);
  st.server.round = round + 1;
  st.clients = std::move(staged);

  rm.clients.resize(st.clients.size());
  for (std::size_t k = 0; k < st.clients.size(); ++k) {
    auto& m = rm.clients[k];
    m.client_id = st.clients[k].id;
    m.task_loss = results[k].task_loss;
    m.tau = results[k].tau;
    m.upload_full = shared_count;
    m.download_full = shared_count;
    m.upload_gap_only = shared_count;
    m.download_gap_only = shared_count;
    fill_eval(m, st.clients[k], cfg);
  }
  aggregate_metrics(rm);
  return rm;
}

}  // namespace

std::vector<std::string> shared_param_names(
    const std::vector<ClientState>& clients) {
  std::vector<std::string> names;
  if (clients.empty()) return names;
  for (const auto& [name, entry] : clients[0].params) {
    bool shared = true;
    for (std::size_t k = 1; k < clients.size(); ++k) {
      if (!clients[k].params.has(name) ||
          !clients[k].params.value(name).same_shape(entry.value)) {
        shared = false;
        break;
      }
    }
    if (shared) names.push_back(name);
  }
  return names;
}

SimState init_sim_state(const World& world, const RunConfig& cfg,
                        std::uint64_t run_seed) {
  SimState st;
  st.clients = make_clients(world, cfg, run_seed);
  st.server.gap.rows = world.bank->rows;  // prototypes start at the bank
  st.server.gap.round = 0;
  st.server.controller =
      server::make_meta_controller(num::derive_seed(run_seed, "server"));
  st.server.round = 0;
  st.server.m_ema = cfg.m_ema;
  st.server.eta_pi = cfg.eta_pi;
  if (method_shares_params(cfg.method)) {
    st.shared = extract_subset(st.clients[0].params,
                               shared_param_names(st.clients));
  }
  return st;
}

RoundMetrics run_round(SimState& st, const RunConfig& cfg) {
  return method_shares_params(cfg.method) ? run_round_fedavg(st, cfg)
                                          : run_round_stage(st, cfg);
}

}  // namespace stage::sim
