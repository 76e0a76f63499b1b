#include "stage/sim/client.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <iostream>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include "stage/graph/perturb.hpp"
#include "stage/graph/synth.hpp"
#include "stage/num/errors.hpp"
#include "stage/num/layers.hpp"
#include "stage/num/ops.hpp"
#include "stage/num/rng.hpp"
#include "stage/prop/attention.hpp"
#include "stage/prop/sketch.hpp"
#include "stage/semantics/fuse.hpp"
#include "stage/semantics/losses.hpp"
#include "stage/semantics/translate.hpp"
#include "stage/server/controller.hpp"
#include "stage/sim/errors.hpp"

namespace stage::sim {

namespace {

using graph::MultimodalGraph;
using num::DenseMatrix;

using EdgeList = std::vector<std::pair<std::uint32_t, std::uint32_t>>;

// Simulated file round trip: features stored as f32 on disk.
void quantize_features(MultimodalGraph& g) {
  for (auto& block : g.features) {
    for (double& v : block.values()) {
      v = static_cast<double>(static_cast<float>(v));
    }
  }
}

double stable_softplus(double x) {
  return x > 30.0 ? x : std::log1p(std::exp(x));
}

// -log sigmoid(x) and -log(1 - sigmoid(x)), overflow-safe.
double nlog_sigmoid(double x) { return stable_softplus(-x); }
double nlog_one_minus_sigmoid(double x) { return x + stable_softplus(-x); }

double sigmoid(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                  : std::exp(x) / (1.0 + std::exp(x));
}

std::uint64_t pair_key(std::uint32_t u, std::uint32_t v, std::uint32_t n) {
  return static_cast<std::uint64_t>(u) * n + v;
}

// Uniform non-edges, u < v, distinct from each other and from `edges`.
EdgeList sample_nonedges(std::uint32_t node_count, const EdgeList& edges,
                         std::size_t count, std::uint64_t seed) {
  std::unordered_set<std::uint64_t> taken;
  taken.reserve(edges.size() + count);
  for (const auto& [u, v] : edges) taken.insert(pair_key(u, v, node_count));
  num::Rng rng(seed);
  EdgeList out;
  out.reserve(count);
  std::size_t attempts = 0;
  const std::size_t max_attempts = 1000 * count + 1000;
  while (out.size() < count) {
    if (++attempts > max_attempts) {
      throw num::DegenerateInputError(
          "cannot sample enough non-edges for negative set");
    }
    auto u = static_cast<std::uint32_t>(rng.uniform_int(node_count));
    auto v = static_cast<std::uint32_t>(rng.uniform_int(node_count));
    if (u == v) continue;
    if (u > v) std::swap(u, v);
    if (!taken.insert(pair_key(u, v, node_count)).second) continue;
    out.emplace_back(u, v);
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct ForwardPass {
  semantics::FusedProjection fp;
  prop::GnnTrace trace;
};

ForwardPass forward_model(const ClientState& c, double tau) {
  ForwardPass f;
  f.fp = semantics::fuse_and_project(c.view, c.params, "proj");
  f.trace =
      prop::gnn_forward(c.params, "gnn", c.gnn_cfg, c.adj, f.fp.embeddings, tau);
  return f;
}

}  // namespace

ClientForward client_forward(const ClientState& client) {
  auto f = forward_model(client, client.last_tau);
  return {std::move(f.fp.embeddings), std::move(f.trace)};
}

namespace {

DenseMatrix gather_rows(const DenseMatrix& m,
                        std::span<const std::uint32_t> rows) {
  DenseMatrix out(rows.size(), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::memcpy(out.row(i).data(), m.row(rows[i]).data(),
                m.cols() * sizeof(double));
  }
  return out;
}

struct TaskLoss {
  double loss = 0.0;
  DenseMatrix dh;  // dLoss/dH_L; empty when with_grad is false
};

// Mean cross entropy over the given nodes; head gradients accumulate when
// with_grad is set.
TaskLoss nc_task_loss(num::ParamStore& params, const DenseMatrix& h,
                      const MultimodalGraph& view,
                      std::span<const std::uint32_t> nodes, bool with_grad) {
  DenseMatrix gathered = gather_rows(h, nodes);
  std::vector<std::uint32_t> labels(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) labels[i] = view.labels[nodes[i]];
  const DenseMatrix logits = num::linear_forward(params, "head", gathered);
  auto sxe = num::softmax_cross_entropy(logits, labels);
  TaskLoss out;
  out.loss = sxe.loss;
  if (with_grad) {
    DenseMatrix dgathered =
        num::linear_backward(params, "head", gathered, sxe.dlogits);
    out.dh = DenseMatrix(h.rows(), h.cols());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      auto dst = out.dh.row(nodes[i]);
      auto src = dgathered.row(i);
      for (std::size_t d = 0; d < dst.size(); ++d) dst[d] += src[d];
    }
  }
  return out;
}

// Mean binary cross entropy of sigmoid(h_u . h_v) over positives and
// negatives.
TaskLoss lp_task_loss(const DenseMatrix& h, const EdgeList& pos,
                      const EdgeList& neg, bool with_grad) {
  const std::size_t total = pos.size() + neg.size();
  if (total == 0) {
    throw num::DegenerateInputError("no edge pairs for link loss");
  }
  TaskLoss out;
  if (with_grad) out.dh = DenseMatrix(h.rows(), h.cols());
  const double inv = 1.0 / static_cast<double>(total);
  auto accumulate = [&](const EdgeList& list, bool positive) {
    for (const auto& [u, v] : list) {
      const double s = num::dot(h.row(u), h.row(v));
      out.loss += inv * (positive ? nlog_sigmoid(s) : nlog_one_minus_sigmoid(s));
      if (with_grad) {
        const double g = inv * (sigmoid(s) - (positive ? 1.0 : 0.0));
        auto du = out.dh.row(u);
        auto dv = out.dh.row(v);
        auto hu = h.row(u);
        auto hv = h.row(v);
        for (std::size_t d = 0; d < du.size(); ++d) {
          du[d] += g * hv[d];
          dv[d] += g * hu[d];
        }
      }
    }
  };
  accumulate(pos, true);
  accumulate(neg, false);
  return out;
}

TaskLoss train_task_loss(ClientState& c, const DenseMatrix& h,
                         const RunConfig& cfg) {
  if (cfg.task == Task::node_classification) {
    return nc_task_loss(c.params, h, c.view, c.train_nodes, true);
  }
  // Fresh negatives per epoch keeps the link task from memorizing one set.
  const auto neg = sample_nonedges(
      static_cast<std::uint32_t>(c.view.node_count), c.train_edges,
      c.train_edges.size(),
      num::derive_seed(c.run_seed, "lp_train_neg", c.id, c.epoch_counter));
  return lp_task_loss(h, c.train_edges, neg, true);
}

double frozen_task_loss(const ClientState& c, const DenseMatrix& h,
                        const RunConfig& cfg, std::span<const std::uint32_t> nodes,
                        const EdgeList& pos, const EdgeList& neg) {
  if (cfg.task == Task::node_classification) {
    DenseMatrix gathered = gather_rows(h, nodes);
    std::vector<std::uint32_t> labels(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      labels[i] = c.view.labels[nodes[i]];
    }
    const DenseMatrix logits = num::linear_forward(c.params, "head", gathered);
    return num::softmax_cross_entropy(logits, labels).loss;
  }
  return lp_task_loss(h, pos, neg, false).loss;
}

semantics::GlobalAnchorPrototypes prototypes_from_broadcast(
    const wire::ServerBroadcast& bc) {
  semantics::GlobalAnchorPrototypes gap;
  gap.round = bc.round;
  gap.rows = dequantize(bc.prototypes, bc.anchor_count, bc.protocol_dim);
  return gap;
}

wire::ClientUpload make_upload(const ClientState& c, std::uint32_t round,
                               const semantics::AnchorStats& stats,
                               const prop::ConflictSketch& sketch, double g,
                               std::uint32_t protocol_dim) {
  wire::ClientUpload up;
  up.client_id = c.id;
  up.round = round;
  up.anchor_ids = stats.anchor_ids;
  up.mean_dim = protocol_dim;
  up.means = quantize(stats.means);
  up.counts = stats.counts;
  up.sketch_mean = static_cast<float>(sketch.mean);
  up.sketch_std = static_cast<float>(sketch.stddev);
  up.meta_gradient = static_cast<float>(g);
  up.validate();
  return up;
}

}  // namespace

std::vector<float> quantize(const DenseMatrix& m) {
  std::vector<float> out(m.size());
  const auto& v = m.values();
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<float>(v[i]);
  return out;
}

DenseMatrix dequantize(const std::vector<float>& v, std::size_t rows,
                       std::size_t cols) {
  if (v.size() != rows * cols) {
    throw std::invalid_argument("float block size does not match shape");
  }
  DenseMatrix out(rows, cols);
  auto& d = out.values();
  for (std::size_t i = 0; i < v.size(); ++i) d[i] = static_cast<double>(v[i]);
  return out;
}

bool method_uses_bank(Method m) {
  return m == Method::stage || m == Method::stage_no_gap ||
         m == Method::stage_no_meta || m == Method::stage_no_entropy;
}

bool method_uses_meta(Method m) {
  return m == Method::stage || m == Method::stage_no_gap ||
         m == Method::stage_no_entropy;
}

bool method_shares_params(Method m) {
  return m == Method::fedavg || m == Method::stage_no_bank;
}

graph::ClientPartition partition_dataset(const MultimodalGraph& g,
                                         const RunConfig& cfg) {
  const std::uint64_t pseed = num::derive_seed(cfg.data.seed, "partition");
  return cfg.partition == PartitionStrategy::communities
             ? graph::partition_communities(g, cfg.client_count(), pseed)
             : graph::partition_edgecut(g, cfg.client_count(), pseed);
}

MultimodalGraph build_dataset(const RunConfig& cfg) {
  cfg.validate();
  auto g = graph::generate_synthetic_mag(cfg.data);
  // Drift is per client, so the partition exists before the features are
  // final; it depends on topology only and reproduces bit-identically when
  // recomputed on the perturbed graph.
  const auto part = partition_dataset(g, cfg);
  graph::apply_feature_drift(g, part, cfg.drift_alpha,
                             num::derive_seed(cfg.data.seed, "drift"));
  if (cfg.noise_ratio > 0.0) {
    graph::apply_modality_noise(g, cfg.noise_ratio,
                                num::derive_seed(cfg.data.seed, "noise"));
  }
  quantize_features(g);
  return g;
}

World build_world_from_graph(MultimodalGraph g, const RunConfig& cfg) {
  cfg.validate();
  World w;
  w.part = partition_dataset(g, cfg);
  w.graph = std::move(g);
  w.encoders = graph::make_client_encoders(cfg.data);
  w.bank = std::make_shared<const semantics::AnchorBank>(
      semantics::init_anchor_bank(cfg.anchor_count, cfg.protocol_dim,
                                  num::derive_seed(cfg.data.seed, "bank")));
  return w;
}

World build_world(const RunConfig& cfg) {
  return build_world_from_graph(build_dataset(cfg), cfg);
}

std::vector<ClientState> make_clients(const World& world, const RunConfig& cfg,
                                      std::uint64_t run_seed) {
  const auto& g = world.graph;
  const std::uint32_t modalities = cfg.data.modality_count();
  std::vector<graph::Split> global_split;
  if (cfg.task == Task::node_classification) {
    global_split = graph::split_train_val_test(
        g, world.part, cfg.splits, num::derive_seed(run_seed, "split"));
  }

  std::vector<ClientState> out;
  out.reserve(world.part.client_count);
  for (std::uint32_t k = 0; k < world.part.client_count; ++k) {
    ClientState c;
    c.id = k;
    c.run_seed = run_seed;
    c.bank = world.bank;
    const auto& members = world.part.members[k];
    const auto n = static_cast<std::uint32_t>(members.size());

    c.view.node_count = n;
    c.view.class_count = g.class_count;
    c.view.labels.resize(n);
    for (std::uint32_t i = 0; i < n; ++i) c.view.labels[i] = g.labels[members[i]];
    c.view.masks.resize(static_cast<std::size_t>(n) * modalities);
    for (std::uint32_t i = 0; i < n; ++i) {
      for (std::uint32_t m = 0; m < modalities; ++m) {
        c.view.masks[static_cast<std::size_t>(i) * modalities + m] =
            g.mask(members[i], m);
      }
    }
    for (std::uint32_t m = 0; m < modalities; ++m) {
      const auto& raw = g.features[m];
      DenseMatrix local(n, raw.cols());
      for (std::uint32_t i = 0; i < n; ++i) {
        std::memcpy(local.row(i).data(), raw.row(members[i]).data(),
                    raw.cols() * sizeof(double));
      }
      // Encoded view; all-zero (masked) rows stay exactly zero.
      c.view.features.push_back(local.matmul_transposed(world.encoders[k][m]));
      c.view.modalities.push_back(
          {m, static_cast<std::uint32_t>(world.encoders[k][m].rows())});
    }

    const auto& edges = world.part.local_edges[k];
    if (cfg.task == Task::link_prediction) {
      EdgeList shuffled = edges;
      num::Rng rng(num::derive_seed(run_seed, "edgesplit", k));
      rng.shuffle(shuffled);
      const auto m = shuffled.size();
      std::size_t n_val = 0;
      std::size_t n_test = 0;
      if (m < 3) {
        std::cerr << "note: client " << k << " has " << m
                  << " edges; assigning all to train\n";
      } else {
        n_val = static_cast<std::size_t>(
            std::llround(cfg.splits.val * static_cast<double>(m)));
        n_test = static_cast<std::size_t>(
            std::llround(cfg.splits.test * static_cast<double>(m)));
        while (n_val + n_test >= m) {
          if (n_test > 0) {
            --n_test;
          } else {
            --n_val;
          }
        }
      }
      c.val_edges.assign(shuffled.begin(), shuffled.begin() + n_val);
      c.test_edges.assign(shuffled.begin() + n_val,
                          shuffled.begin() + n_val + n_test);
      c.train_edges.assign(shuffled.begin() + n_val + n_test, shuffled.end());
      std::sort(c.train_edges.begin(), c.train_edges.end());
      std::sort(c.val_edges.begin(), c.val_edges.end());
      std::sort(c.test_edges.begin(), c.test_edges.end());
      c.val_neg = sample_nonedges(n, edges, c.val_edges.size(),
                                  num::derive_seed(run_seed, "lp_negatives", k, 1));
      c.test_neg = sample_nonedges(n, edges, c.test_edges.size(),
                                   num::derive_seed(run_seed, "lp_negatives", k, 2));
      // Held-out edges are invisible to propagation.
      c.view.edges = c.train_edges;
      c.split.assign(n, graph::Split::Train);
    } else {
      c.view.edges = edges;
      c.split.resize(n);
      for (std::uint32_t i = 0; i < n; ++i) {
        c.split[i] = global_split[members[i]];
        switch (c.split[i]) {
          case graph::Split::Train: c.train_nodes.push_back(i); break;
          case graph::Split::Val: c.val_nodes.push_back(i); break;
          case graph::Split::Test: c.test_nodes.push_back(i); break;
        }
      }
    }
    c.view.validate();
    c.adj = prop::make_adjacency(n, c.view.edges);

    std::size_t in_dim = 0;
    for (const auto& spec : c.view.modalities) in_dim += spec.dim;
    num::Rng init_rng(num::derive_seed(run_seed, "client_init", k));
    num::linear_init(c.params, "proj", in_dim, cfg.protocol_dim, init_rng);
    c.gnn_cfg.leaky_slope = cfg.leaky_slope;
    c.gnn_cfg.dims.assign(cfg.gnn_layers + 1, cfg.gnn_hidden);
    c.gnn_cfg.dims.front() = cfg.protocol_dim;
    c.gnn_cfg.dims.back() = cfg.protocol_dim;
    prop::gnn_init(c.params, "gnn", c.gnn_cfg, init_rng);
    if (cfg.task == Task::node_classification) {
      num::linear_init(c.params, "head", cfg.protocol_dim, g.class_count,
                       init_rng);
    }
    out.push_back(std::move(c));
  }
  return out;
}

LocalTrainResult local_train_stage(ClientState& client,
                                   const wire::ServerBroadcast& broadcast,
                                   const RunConfig& cfg) {
  const auto& bank = *client.bank;
  if (broadcast.anchor_count != bank.anchor_count ||
      broadcast.protocol_dim != bank.protocol_dim) {
    throw std::invalid_argument("broadcast shape does not match anchor bank");
  }
  const bool use_meta = method_uses_meta(cfg.method);
  // Ablations drop a term from the objective but keep reporting its value.
  const double lambda =
      cfg.method == Method::stage_no_gap ? 0.0 : cfg.lambda_gap;
  const double beta =
      cfg.method == Method::stage_no_entropy ? 0.0 : cfg.beta_entropy;
  const auto gap = prototypes_from_broadcast(broadcast);
  server::MetaController ctrl =
      server::controller_from_flat(broadcast.controller_params);
  const auto weights = prop::uniform_weights(client.adj);

  LocalTrainResult res;
  std::uint32_t epoch = 0;
  try {
    for (; epoch < cfg.local_epochs; ++epoch) {
      auto fp = semantics::fuse_and_project(client.view, client.params, "proj");
      if (!fp.embeddings.all_finite()) {
        throw DivergenceError(client.id, broadcast.round, epoch,
                              "non-finite embeddings");
      }
      auto assign = semantics::translate(fp.embeddings, bank, cfg.tau_s);
      const auto sketch = prop::conflict_sketch(assign.q, client.adj, weights);
      const double tau =
          use_meta ? server::controller_forward(ctrl, sketch).value : 1.0;
      client.last_tau = tau;

      auto ent = semantics::entropy_loss(assign.q);
      auto stats = semantics::anchor_conditional_means(fp.embeddings, assign.q,
                                                       cfg.n_min);
      auto gl = semantics::gap_loss(stats, gap, cfg.tau_c);
      auto trace = prop::gnn_forward(client.params, "gnn", client.gnn_cfg,
                                     client.adj, fp.embeddings, tau);

      client.params.zero_grads();
      client.epoch_counter = broadcast.round * cfg.local_epochs + epoch;
      auto task = train_task_loss(client, trace.output(), cfg);
      double total = task.loss;
      if (lambda != 0.0) total += lambda * gl.loss;
      if (beta != 0.0) total += beta * ent.loss;
      if (!std::isfinite(total)) {
        throw DivergenceError(client.id, broadcast.round, epoch,
                              "non-finite training loss");
      }

      auto gb = prop::gnn_backward(client.params, "gnn", client.gnn_cfg,
                                   client.adj, trace, task.dh);
      DenseMatrix dh0 = std::move(gb.dinput);
      if (beta != 0.0) {
        auto dq = ent.dq;
        dq.scale(beta);
        dh0.add_scaled(
            semantics::translate_backward(fp.embeddings, bank, assign, dq),
            1.0);
      }
      if (lambda != 0.0 && !gl.skipped) {
        const auto hard = semantics::hard_assignments(assign.q);
        std::vector<std::uint32_t> slot(bank.anchor_count, UINT32_MAX);
        for (std::uint32_t i = 0; i < stats.anchor_ids.size(); ++i) {
          slot[stats.anchor_ids[i]] = i;
        }
        for (std::size_t v = 0; v < hard.size(); ++v) {
          const std::uint32_t i = slot[hard[v]];
          if (i == UINT32_MAX) continue;  // below n_min, not in the active set
          const double w = lambda / stats.counts[i];
          auto dst = dh0.row(v);
          auto src = gl.dmeans.row(i);
          for (std::size_t d = 0; d < dst.size(); ++d) dst[d] += w * src[d];
        }
      }
      num::linear_backward(client.params, "proj", fp.inputs, dh0);
      client.params.sgd_step(cfg.learning_rate);

      if (epoch + 1 == cfg.local_epochs) {
        res.task_loss = task.loss;
        res.gap_loss = gl.loss;
        res.entropy_loss = ent.loss;
        res.tau = tau;
        res.gap_skipped = gl.skipped;
      }
    }

    // Post-training statistics feed the upload.
    auto fp = semantics::fuse_and_project(client.view, client.params, "proj");
    auto assign = semantics::translate(fp.embeddings, bank, cfg.tau_s);
    auto stats =
        semantics::anchor_conditional_means(fp.embeddings, assign.q, cfg.n_min);
    const auto sketch = prop::conflict_sketch(assign.q, client.adj, weights);
    client.last_tau =
        use_meta ? server::controller_forward(ctrl, sketch).value : 1.0;
    MetaGradient mg;
    if (use_meta) mg = compute_meta_gradient(client, cfg, client.last_tau);
    res.meta_gradient = mg.g;
    res.empty_val = mg.empty_val;
    res.upload = make_upload(client, broadcast.round, stats, sketch, mg.g,
                             bank.protocol_dim);
  } catch (const num::NonFiniteError& e) {
    // Overflow deep in a kernel (cosine, softmax) is divergence, not a bug.
    throw DivergenceError(client.id, broadcast.round, epoch, e.what());
  }
  return res;
}

LocalTrainResult local_train_task_only(ClientState& client,
                                       const RunConfig& cfg,
                                       std::uint32_t round) {
  LocalTrainResult res;
  res.gap_skipped = true;
  client.last_tau = 1.0;
  std::uint32_t epoch = 0;
  try {
    for (; epoch < cfg.local_epochs; ++epoch) {
      auto fp = semantics::fuse_and_project(client.view, client.params, "proj");
      if (!fp.embeddings.all_finite()) {
        throw DivergenceError(client.id, round, epoch,
                              "non-finite embeddings");
      }
      auto trace = prop::gnn_forward(client.params, "gnn", client.gnn_cfg,
                                     client.adj, fp.embeddings, 1.0);
      client.params.zero_grads();
      client.epoch_counter = round * cfg.local_epochs + epoch;
      auto task = train_task_loss(client, trace.output(), cfg);
      if (!std::isfinite(task.loss)) {
        throw DivergenceError(client.id, round, epoch,
                              "non-finite training loss");
      }
      auto gb = prop::gnn_backward(client.params, "gnn", client.gnn_cfg,
                                   client.adj, trace, task.dh);
      num::linear_backward(client.params, "proj", fp.inputs, gb.dinput);
      client.params.sgd_step(cfg.learning_rate);
      if (epoch + 1 == cfg.local_epochs) res.task_loss = task.loss;
    }
  } catch (const num::NonFiniteError& e) {
    throw DivergenceError(client.id, round, epoch, e.what());
  }
  return res;
}

double central_difference(double tau, const std::function<double(double)>& f) {
  const double h = std::max(1e-3, 0.01 * tau);
  const double hi = tau + h;
  const double lo = std::max(tau - h, prop::kTauMin);
  return (f(hi) - f(lo)) / (hi - lo);
}

MetaGradient compute_meta_gradient(const ClientState& client,
                                   const RunConfig& cfg, double tau) {
  const bool empty = cfg.task == Task::node_classification
                         ? client.val_nodes.empty()
                         : (client.val_edges.empty() || client.val_neg.empty());
  if (empty) return {0.0, true};
  auto val_loss = [&](double t) {
    auto fwd = forward_model(client, t);
    return frozen_task_loss(client, fwd.trace.output(), cfg, client.val_nodes,
                            client.val_edges, client.val_neg);
  };
  return {central_difference(tau, val_loss), false};
}

EvalResult evaluate_task(const ClientState& client, const RunConfig& cfg,
                         graph::Split split) {
  auto fwd = forward_model(client, client.last_tau);
  const auto& h = fwd.trace.output();
  if (cfg.task == Task::node_classification) {
    const std::vector<std::uint32_t>* nodes = nullptr;
    switch (split) {
      case graph::Split::Train: nodes = &client.train_nodes; break;
      case graph::Split::Val: nodes = &client.val_nodes; break;
      case graph::Split::Test: nodes = &client.test_nodes; break;
    }
    if (nodes->empty()) {
      throw UndefinedMetricError("no nodes in requested split on client " +
                                 std::to_string(client.id));
    }
    DenseMatrix gathered = gather_rows(h, *nodes);
    const DenseMatrix logits =
        num::linear_forward(client.params, "head", gathered);
    std::uint32_t correct = 0;
    for (std::size_t i = 0; i < nodes->size(); ++i) {
      auto row = logits.row(i);
      std::size_t best = 0;
      for (std::size_t j = 1; j < row.size(); ++j) {
        if (row[j] > row[best]) best = j;  // ties keep the lowest class
      }
      if (best == client.view.labels[(*nodes)[i]]) ++correct;
    }
    return {static_cast<double>(correct) / static_cast<double>(nodes->size()),
            static_cast<std::uint32_t>(nodes->size())};
  }

  const EdgeList* pos = nullptr;
  const EdgeList* neg = nullptr;
  EdgeList train_neg;
  switch (split) {
    case graph::Split::Val:
      pos = &client.val_edges;
      neg = &client.val_neg;
      break;
    case graph::Split::Test:
      pos = &client.test_edges;
      neg = &client.test_neg;
      break;
    case graph::Split::Train: {
      EdgeList all = client.train_edges;
      all.insert(all.end(), client.val_edges.begin(), client.val_edges.end());
      all.insert(all.end(), client.test_edges.begin(), client.test_edges.end());
      std::sort(all.begin(), all.end());
      train_neg = sample_nonedges(
          static_cast<std::uint32_t>(client.view.node_count), all,
          client.train_edges.size(),
          num::derive_seed(client.run_seed, "lp_eval_train_neg", client.id));
      pos = &client.train_edges;
      neg = &train_neg;
      break;
    }
  }
  std::vector<double> pos_scores, neg_scores;
  pos_scores.reserve(pos->size());
  neg_scores.reserve(neg->size());
  for (const auto& [u, v] : *pos) {
    pos_scores.push_back(num::dot(h.row(u), h.row(v)));
  }
  for (const auto& [u, v] : *neg) {
    neg_scores.push_back(num::dot(h.row(u), h.row(v)));
  }
  const auto count =
      static_cast<std::uint32_t>(pos_scores.size() + neg_scores.size());
  return {rank_auc(std::move(pos_scores), std::move(neg_scores)), count};
}

double rank_auc(std::vector<double> positive_scores,
                std::vector<double> negative_scores) {
  if (positive_scores.empty() || negative_scores.empty()) {
    throw UndefinedMetricError(
        "AUC undefined without both positives and negatives");
  }
  struct Scored {
    double score;
    bool positive;
  };
  std::vector<Scored> scored;
  scored.reserve(positive_scores.size() + negative_scores.size());
  for (double s : positive_scores) scored.push_back({s, true});
  for (double s : negative_scores) scored.push_back({s, false});
  std::sort(scored.begin(), scored.end(),
            [](const Scored& a, const Scored& b) { return a.score < b.score; });
  double rank_sum = 0.0;
  std::size_t i = 0;
  while (i < scored.size()) {
    std::size_t j = i;
    while (j < scored.size() && scored[j].score == scored[i].score) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // 1-based
    for (std::size_t t = i; t < j; ++t) {
      if (scored[t].positive) rank_sum += avg_rank;
    }
    i = j;
  }
  const auto p = static_cast<double>(positive_scores.size());
  const auto q = static_cast<double>(negative_scores.size());
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * q);
}

}  // namespace stage::sim
