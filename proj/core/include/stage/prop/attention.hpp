#pragma once

#include <span>
#include <vector>

#include "stage/prop/adjacency.hpp"

namespace stage::prop {

// Hard floor for propagation temperatures.
inline constexpr double kTauMin = 0.1;

struct PropagationTemperature {
  enum class Source { controller, fixed };
  double value = 1.0;  // always >= kTauMin
  Source source = Source::fixed;
};

// Per-neighborhood tempered softmax: for each node v,
// alpha_vu = softmax over N(v) of e_vu / tau_k. Output aligns with the
// adjacency slot order; each neighborhood sums to 1.
std::vector<double> regulated_attention(std::span<const double> edge_logits,
                                        const Adjacency& adj, double tau_k);

}  // namespace stage::prop
