#pragma once

#include <cmath>
#include <span>

#include "stage/num/matrix.hpp"

namespace stage::num {

// Probabilities below this are clamped inside logs so entropy-style terms
// never produce -inf.
inline constexpr double kLogFloor = 1e-12;

inline double guarded_log(double x) {
  return std::log(x < kLogFloor ? kLogFloor : x);
}

// Temperature-scaled softmax of each row, max-subtracted for stability.
// Rejects non-positive temperatures and non-finite logits.
DenseMatrix softmax_rows(const DenseMatrix& logits, double temperature);

// In-place variant over a single row span.
void softmax_span(std::span<double> logits, double temperature);

// Cosine similarity in [-1, 1]; throws DegenerateInputError on a
// zero-norm operand.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

}  // namespace stage::num
