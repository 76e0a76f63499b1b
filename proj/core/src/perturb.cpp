#include "stage/graph/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "stage/num/rng.hpp"

namespace stage::graph {

DriftVectors apply_feature_drift(MultimodalGraph& g,
                                 const ClientPartition& part, double alpha,
                                 std::uint64_t seed) {
  if (!std::isfinite(alpha)) throw std::invalid_argument("alpha must be finite");
  if (part.assignments.size() != g.node_count) {
    throw std::invalid_argument("partition does not match graph");
  }
  const std::uint32_t m = g.modality_count();
  DriftVectors out;
  out.bias.resize(part.client_count);
  for (std::uint32_t k = 0; k < part.client_count; ++k) {
    out.bias[k].resize(m);
    for (std::uint32_t c = 0; c < m; ++c) {
      num::Rng rng(num::derive_seed(seed, "drift", k, c));
      auto& bias = out.bias[k][c];
      bias.resize(g.modalities[c].dim);
      for (double& x : bias) x = alpha * rng.normal();
    }
  }
  if (alpha == 0.0) return out;  // keep features bit-identical
  for (std::uint32_t v = 0; v < g.node_count; ++v) {
    const std::uint32_t k = part.assignments[v];
    for (std::uint32_t c = 0; c < m; ++c) {
      if (!g.mask(v, c)) continue;
      auto row = g.features[c].row(v);
      const auto& bias = out.bias[k][c];
      for (std::size_t j = 0; j < row.size(); ++j) row[j] += bias[j];
    }
  }
  return out;
}

std::vector<std::vector<std::uint32_t>> apply_modality_noise(
    MultimodalGraph& g, double ratio, std::uint64_t seed) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) {
    throw std::invalid_argument("ratio must be in [0, 1]");
  }
  const std::uint32_t m = g.modality_count();
  std::vector<std::vector<std::uint32_t>> replaced(m);
  for (std::uint32_t c = 0; c < m; ++c) {
    std::vector<std::uint32_t> available;
    for (std::uint32_t v = 0; v < g.node_count; ++v) {
      if (g.mask(v, c)) available.push_back(v);
    }
    const auto count = static_cast<std::size_t>(
        std::floor(ratio * static_cast<double>(available.size())));
    num::Rng pick_rng(num::derive_seed(seed, "noise_pick", c));
    pick_rng.shuffle(available);
    available.resize(count);
    std::sort(available.begin(), available.end());
    num::Rng row_rng(num::derive_seed(seed, "noise_row", c));
    for (auto v : available) {
      for (double& x : g.features[c].row(v)) x = row_rng.normal();
    }
    replaced[c] = std::move(available);
  }
  return replaced;
}

}  // namespace stage::graph
