#include "stage/graph/split.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

#include "stage/num/rng.hpp"

namespace stage::graph {

void SplitFractions::validate() const {
  if (train <= 0.0 || val < 0.0 || test < 0.0) {
    throw std::invalid_argument("split fractions must be positive");
  }
  if (std::abs(train + val + test - 1.0) > 1e-9) {
    throw std::invalid_argument("split fractions must sum to 1");
  }
}

std::vector<Split> split_train_val_test(const MultimodalGraph& g,
                                        const ClientPartition& part,
                                        const SplitFractions& fractions,
                                        std::uint64_t seed) {
  fractions.validate();
  if (part.assignments.size() != g.node_count) {
    throw std::invalid_argument("partition does not match graph");
  }

  std::vector<Split> split(g.node_count, Split::Train);
  for (std::uint32_t k = 0; k < part.client_count; ++k) {
    for (std::uint32_t y = 0; y < g.class_count; ++y) {
      std::vector<std::uint32_t> stratum;
      for (auto v : part.members[k]) {
        if (g.labels[v] == y) stratum.push_back(v);
      }
      const auto n = stratum.size();
      if (n == 0) continue;
      if (n < 3) {
        std::cerr << "note: class " << y << " has " << n
                  << " nodes on client " << k << "; assigning all to train\n";
        continue;
      }
      num::Rng rng(num::derive_seed(seed, "split", k, y));
      rng.shuffle(stratum);
      auto n_val = static_cast<std::size_t>(
          std::llround(fractions.val * static_cast<double>(n)));
      auto n_test = static_cast<std::size_t>(
          std::llround(fractions.test * static_cast<double>(n)));
      while (n_val + n_test >= n) {  // keep at least one training node
        if (n_test > 0) {
          --n_test;
        } else {
          --n_val;
        }
      }
      for (std::size_t i = 0; i < n_val; ++i) split[stratum[i]] = Split::Val;
      for (std::size_t i = n_val; i < n_val + n_test; ++i) {
        split[stratum[i]] = Split::Test;
      }
    }
  }
  return split;
}

}  // namespace stage::graph
