#pragma once

#include <cstdint>
#include <vector>

#include "stage/graph/graph.hpp"
#include "stage/graph/partition.hpp"

namespace stage::graph {

enum class Split : std::uint8_t { Train = 0, Val = 1, Test = 2 };

struct SplitFractions {
  double train = 0.6;
  double val = 0.2;
  double test = 0.2;

  void validate() const;
};

// Stratified per (client, class): within each stratum the val/test counts are
// the rounded targets and the leftover trains. Strata with fewer than three
// nodes go entirely to train (noted on stderr). Deterministic in seed.
std::vector<Split> split_train_val_test(const MultimodalGraph& g,
                                        const ClientPartition& part,
                                        const SplitFractions& fractions,
                                        std::uint64_t seed);

}  // namespace stage::graph
