#include "stage/graph/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "stage/num/rng.hpp"

namespace stage::graph {

std::uint32_t SynthConfig::raw_dim(std::uint32_t c) const {
  std::uint32_t d = 0;
  for (const auto& dims : client_modality_dims) d = std::max(d, dims[c]);
  return d;
}

void SynthConfig::validate() const {
  if (node_count == 0) throw std::invalid_argument("node_count must be > 0");
  if (class_count < 2 || class_count > node_count) {
    throw std::invalid_argument("class_count must be in [2, node_count]");
  }
  if (!(p_out >= 0.0 && p_out < p_in && p_in <= 1.0)) {
    throw std::invalid_argument("need 0 <= p_out < p_in <= 1");
  }
  if (!(mask_drop >= 0.0 && mask_drop < 1.0)) {
    throw std::invalid_argument("mask_drop must be in [0, 1)");
  }
  if (noise_std < 0.0 || prototype_scale <= 0.0) {
    throw std::invalid_argument("noise_std >= 0 and prototype_scale > 0 required");
  }
  if (client_modality_dims.empty()) {
    throw std::invalid_argument("need at least one client");
  }
  const std::size_t m = client_modality_dims[0].size();
  if (m == 0) throw std::invalid_argument("need at least one modality");
  for (const auto& dims : client_modality_dims) {
    if (dims.size() != m) {
      throw std::invalid_argument("all clients must list the same modalities");
    }
    for (auto d : dims) {
      if (d == 0) throw std::invalid_argument("modality dim must be > 0");
    }
  }
}

MultimodalGraph generate_synthetic_mag(const SynthConfig& cfg) {
  cfg.validate();
  const std::uint32_t n = cfg.node_count;
  const std::uint32_t classes = cfg.class_count;
  const std::uint32_t m = cfg.modality_count();

  MultimodalGraph g;
  g.node_count = n;
  g.class_count = classes;
  g.modalities.resize(m);
  for (std::uint32_t c = 0; c < m; ++c) {
    g.modalities[c] = {c, cfg.raw_dim(c)};
  }

  // Balanced labels: class sizes differ by at most one, order shuffled.
  g.labels.resize(n);
  for (std::uint32_t v = 0; v < n; ++v) g.labels[v] = v % classes;
  num::Rng label_rng(num::derive_seed(cfg.seed, "labels"));
  label_rng.shuffle(g.labels);

  // Unit-direction class prototypes, one per (modality, class).
  num::Rng proto_rng(num::derive_seed(cfg.seed, "prototypes"));
  std::vector<num::DenseMatrix> protos;  // per modality: classes x dim
  protos.reserve(m);
  for (std::uint32_t c = 0; c < m; ++c) {
    num::DenseMatrix p(classes, g.modalities[c].dim);
    for (std::uint32_t y = 0; y < classes; ++y) {
      auto row = p.row(y);
      double norm_sq = 0.0;
      for (double& x : row) {
        x = proto_rng.normal();
        norm_sq += x * x;
      }
      const double inv = cfg.prototype_scale / std::sqrt(norm_sq);
      for (double& x : row) x *= inv;
    }
    protos.push_back(std::move(p));
  }

  // Masks: independent drops, redrawn until each node keeps a modality.
  g.masks.assign(static_cast<std::size_t>(n) * m, 1);
  num::Rng mask_rng(num::derive_seed(cfg.seed, "masks"));
  for (std::uint32_t v = 0; v < n; ++v) {
    while (true) {
      bool any = false;
      for (std::uint32_t c = 0; c < m; ++c) {
        const bool keep = !mask_rng.bernoulli(cfg.mask_drop);
        g.set_mask(v, c, keep);
        any = any || keep;
      }
      if (any) break;
    }
  }

  // Features: prototype of own class plus iid noise; masked rows stay zero.
  num::Rng feat_rng(num::derive_seed(cfg.seed, "features"));
  g.features.reserve(m);
  for (std::uint32_t c = 0; c < m; ++c) {
    num::DenseMatrix block(n, g.modalities[c].dim);
    for (std::uint32_t v = 0; v < n; ++v) {
      if (!g.mask(v, c)) continue;
      auto row = block.row(v);
      auto proto = protos[c].row(g.labels[v]);
      for (std::size_t j = 0; j < row.size(); ++j) {
        row[j] = proto[j] + cfg.noise_std * feat_rng.normal();
      }
    }
    g.features.push_back(std::move(block));
  }

  // Planted partition over unordered pairs, scanned in lexicographic order.
  num::Rng edge_rng(num::derive_seed(cfg.seed, "edges"));
  for (std::uint32_t u = 0; u < n; ++u) {
    for (std::uint32_t v = u + 1; v < n; ++v) {
      const double p = g.labels[u] == g.labels[v] ? cfg.p_in : cfg.p_out;
      if (edge_rng.bernoulli(p)) g.edges.emplace_back(u, v);
    }
  }

  g.validate();
  return g;
}

std::vector<std::vector<num::DenseMatrix>> make_client_encoders(
    const SynthConfig& cfg) {
  cfg.validate();
  const std::uint32_t m = cfg.modality_count();
  std::vector<std::vector<num::DenseMatrix>> out(cfg.client_count());
  for (std::uint32_t k = 0; k < cfg.client_count(); ++k) {
    out[k].reserve(m);
    for (std::uint32_t c = 0; c < m; ++c) {
      const std::uint32_t raw = cfg.raw_dim(c);
      num::Rng rng(num::derive_seed(cfg.seed, "encoder", k, c));
      num::DenseMatrix e(cfg.client_modality_dims[k][c], raw);
      const double scale = 1.0 / std::sqrt(static_cast<double>(raw));
      for (double& x : e.values()) x = scale * rng.normal();
      out[k].push_back(std::move(e));
    }
  }
  return out;
}

}  // namespace stage::graph
