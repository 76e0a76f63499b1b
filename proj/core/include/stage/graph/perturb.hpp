#pragma once

#include <cstdint>
#include <vector>

#include "stage/graph/graph.hpp"
#include "stage/graph/partition.hpp"

namespace stage::graph {

// Client-level drift: every available row of modality c on client k gets the
// same additive bias alpha * v, v drawn once per (client, modality) from a
// standard normal. bias[k][c] holds the applied alpha * v so callers can
// reason about ground truth. Masked-off rows are untouched; alpha == 0
// leaves features bit-identical.
struct DriftVectors {
  std::vector<std::vector<std::vector<double>>> bias;
};

DriftVectors apply_feature_drift(MultimodalGraph& g,
                                 const ClientPartition& part, double alpha,
                                 std::uint64_t seed);

// Replaces floor(ratio * available_rows) rows per modality with iid standard
// normal rows. Returns the replaced node ids per modality, ascending.
std::vector<std::vector<std::uint32_t>> apply_modality_noise(
    MultimodalGraph& g, double ratio, std::uint64_t seed);

}  // namespace stage::graph
