#pragma once

#include <cstdint>
#include <vector>

#include "stage/graph/graph.hpp"
#include "stage/num/matrix.hpp"

namespace stage::graph {

// Planted-partition multimodal generator. Class structure drives both the
// topology (p_in vs p_out) and the features (per-class, per-modality
// prototypes plus Gaussian noise).
//
// Clients run heterogeneous frozen encoders, so the same modality has a
// different dimension on each client. The graph stores raw features at the
// per-modality maximum of those dims; make_client_encoders() produces the
// fixed projections that map raw rows into each client's own space.
struct SynthConfig {
  std::uint32_t node_count = 0;
  std::uint32_t class_count = 0;
  double p_in = 0.0;
  double p_out = 0.0;
  // dims[k][c] = encoder output dim of modality c on client k.
  std::vector<std::vector<std::uint32_t>> client_modality_dims;
  double prototype_scale = 1.0;
  double noise_std = 0.1;
  double mask_drop = 0.0;
  std::uint64_t seed = 0;

  std::uint32_t client_count() const {
    return static_cast<std::uint32_t>(client_modality_dims.size());
  }
  std::uint32_t modality_count() const {
    return client_modality_dims.empty()
               ? 0
               : static_cast<std::uint32_t>(client_modality_dims[0].size());
  }
  // Raw storage dim for modality c: max over clients.
  std::uint32_t raw_dim(std::uint32_t c) const;

  // Throws std::invalid_argument on inconsistent or out-of-range fields.
  void validate() const;
};

// Deterministic in cfg.seed: identical config yields a bit-identical graph.
MultimodalGraph generate_synthetic_mag(const SynthConfig& cfg);

// encoders[k][c]: dims[k][c] x raw_dim(c), entries N(0, 1/raw_dim). Drawn
// from a stream independent of the graph itself, so views are stable across
// partitioning choices.
std::vector<std::vector<num::DenseMatrix>> make_client_encoders(
    const SynthConfig& cfg);

}  // namespace stage::graph
