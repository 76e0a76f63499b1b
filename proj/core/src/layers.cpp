#include "stage/num/layers.hpp"

#include <cmath>
#include <stdexcept>

#include "stage/num/ops.hpp"

namespace stage::num {

void linear_init(ParamStore& params, const std::string& prefix,
                 std::size_t in_dim, std::size_t out_dim, Rng& rng) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(in_dim));
  params.create_gaussian(prefix + ".weight", out_dim, in_dim, rng, scale);
  params.create(prefix + ".bias", 1, out_dim);
}

DenseMatrix linear_forward(const ParamStore& params, const std::string& prefix,
                           const DenseMatrix& x) {
  const DenseMatrix& w = params.value(prefix + ".weight");
  const DenseMatrix& b = params.value(prefix + ".bias");
  if (x.cols() != w.cols()) {
    throw std::invalid_argument("linear_forward: input dim " +
                                std::to_string(x.cols()) + " != weight dim " +
                                std::to_string(w.cols()) + " for '" + prefix +
                                "'");
  }
  DenseMatrix y = x.matmul_transposed(w);
  for (std::size_t r = 0; r < y.rows(); ++r) {
    for (std::size_t c = 0; c < y.cols(); ++c) y(r, c) += b(0, c);
  }
  return y;
}

DenseMatrix linear_backward(ParamStore& params, const std::string& prefix,
                            const DenseMatrix& x, const DenseMatrix& dy) {
  const DenseMatrix& w = params.value(prefix + ".weight");
  DenseMatrix& dw = params.grad(prefix + ".weight");
  DenseMatrix& db = params.grad(prefix + ".bias");

  // dW = dy^T x, db = column sums of dy, dx = dy W
  DenseMatrix dyt = dy.transposed();
  dw.add_scaled(dyt.matmul(x), 1.0);
  for (std::size_t r = 0; r < dy.rows(); ++r) {
    for (std::size_t c = 0; c < dy.cols(); ++c) db(0, c) += dy(r, c);
  }
  return dy.matmul(w);
}

SoftmaxXentResult softmax_cross_entropy(
    const DenseMatrix& logits, std::span<const std::uint32_t> labels) {
  if (labels.size() != logits.rows()) {
    throw std::invalid_argument("softmax_cross_entropy: label count mismatch");
  }
  SoftmaxXentResult res;
  res.probs = softmax_rows(logits, 1.0);
  res.dlogits = DenseMatrix(logits.rows(), logits.cols());
  const double inv_n = 1.0 / static_cast<double>(logits.rows());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const std::uint32_t y = labels[r];
    if (y >= logits.cols()) {
      throw std::invalid_argument("softmax_cross_entropy: label out of range");
    }
    res.loss -= guarded_log(res.probs(r, y)) * inv_n;
    for (std::size_t c = 0; c < logits.cols(); ++c) {
      res.dlogits(r, c) =
          (res.probs(r, c) - (c == y ? 1.0 : 0.0)) * inv_n;
    }
  }
  return res;
}

}  // namespace stage::num
