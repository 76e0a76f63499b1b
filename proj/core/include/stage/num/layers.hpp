#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "stage/num/param_store.hpp"

namespace stage::num {

// Dense affine layer y = x W^T + b over row-major batches. Parameters are
// stored under "<prefix>.weight" (out x in) and "<prefix>.bias" (1 x out).
void linear_init(ParamStore& params, const std::string& prefix,
                 std::size_t in_dim, std::size_t out_dim, Rng& rng);

DenseMatrix linear_forward(const ParamStore& params, const std::string& prefix,
                           const DenseMatrix& x);

// Accumulates weight/bias gradients into the store and returns dLoss/dx.
DenseMatrix linear_backward(ParamStore& params, const std::string& prefix,
                            const DenseMatrix& x, const DenseMatrix& dy);

struct SoftmaxXentResult {
  double loss = 0.0;        // mean cross entropy over rows
  DenseMatrix dlogits;      // exact gradient w.r.t. the logits
  DenseMatrix probs;
};

SoftmaxXentResult softmax_cross_entropy(const DenseMatrix& logits,
                                        std::span<const std::uint32_t> labels);

}  // namespace stage::num
