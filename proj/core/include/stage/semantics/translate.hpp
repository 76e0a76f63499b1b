#pragma once

#include "stage/num/matrix.hpp"
#include "stage/semantics/anchor_bank.hpp"

namespace stage::semantics {

// Row-stochastic assignment of nodes to anchors.
struct SemanticAssignment {
  num::DenseMatrix q;  // node_count x M, each row on the simplex
  double tau_s = 0.0;
};

// q_v = softmax_i( cos(h_v, b_i) / tau_s ). This is the closed-form unique
// minimizer of the KL-regularized projection objective
//   min_q on simplex  -sum_i q_i cos(h_v, b_i) + tau_s * KL(q || uniform).
// Throws DegenerateInputError naming the node on a zero-norm embedding row.
SemanticAssignment translate(const num::DenseMatrix& h, const AnchorBank& bank,
                             double tau_s);

// Gradient of any scalar loss through the assignment back to the embeddings.
// The bank is frozen: no gradient is produced for it.
num::DenseMatrix translate_backward(const num::DenseMatrix& h,
                                    const AnchorBank& bank,
                                    const SemanticAssignment& assignment,
                                    const num::DenseMatrix& dq);

}  // namespace stage::semantics
