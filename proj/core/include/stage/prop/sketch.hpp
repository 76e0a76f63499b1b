#pragma once

#include <span>

#include "stage/num/matrix.hpp"
#include "stage/prop/adjacency.hpp"

namespace stage::prop {

// q~_v = sum over N(v) of w_vu q_u. Weights must be row-stochastic per
// neighborhood (checked to 1e-9); rows stay on the simplex.
num::DenseMatrix neighborhood_context(const num::DenseMatrix& q,
                                      const Adjacency& adj,
                                      std::span<const double> weights);

// Jensen-Shannon divergence, natural log, 0 log 0 = 0. Symmetric, in
// [0, ln 2] for simplex inputs.
double js_divergence(std::span<const double> p, std::span<const double> q);

// Client-level conflict statistics over d_v = JS(q_v || q~_v).
struct ConflictSketch {
  double mean = 0.0;  // in [0, ln 2]
  double stddev = 0.0;

  bool operator==(const ConflictSketch&) const = default;
};

ConflictSketch conflict_sketch(const num::DenseMatrix& q, const Adjacency& adj,
                               std::span<const double> weights);

}  // namespace stage::prop
