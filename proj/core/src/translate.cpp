#include "stage/semantics/translate.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "stage/num/errors.hpp"
#include "stage/num/matrix.hpp"
#include "stage/num/ops.hpp"

namespace stage::semantics {

namespace {

// Cosine similarities against unit-norm bank rows: s_vi = h_v . b_i / |h_v|.
num::DenseMatrix cosine_logits(const num::DenseMatrix& h,
                               const AnchorBank& bank) {
  if (h.cols() != bank.protocol_dim) {
    throw std::invalid_argument("embedding dim != protocol dim");
  }
  num::DenseMatrix s(h.rows(), bank.anchor_count);
  for (std::size_t v = 0; v < h.rows(); ++v) {
    const auto hv = h.row(v);
    const double n = num::norm(hv);
    if (n <= 0.0 || !std::isfinite(n)) {
      throw num::DegenerateInputError("zero-norm embedding at node " +
                                      std::to_string(v));
    }
    for (std::uint32_t i = 0; i < bank.anchor_count; ++i) {
      s(v, i) = num::dot(hv, bank.rows.row(i)) / n;
    }
  }
  return s;
}

}  // namespace

SemanticAssignment translate(const num::DenseMatrix& h, const AnchorBank& bank,
                             double tau_s) {
  SemanticAssignment out;
  out.q = num::softmax_rows(cosine_logits(h, bank), tau_s);
  out.tau_s = tau_s;
  return out;
}

num::DenseMatrix translate_backward(const num::DenseMatrix& h,
                                    const AnchorBank& bank,
                                    const SemanticAssignment& assignment,
                                    const num::DenseMatrix& dq) {
  if (!dq.same_shape(assignment.q)) {
    throw std::invalid_argument("dq shape != assignment shape");
  }
  const num::DenseMatrix s = cosine_logits(h, bank);
  num::DenseMatrix dh(h.rows(), h.cols());
  const double inv_tau = 1.0 / assignment.tau_s;
  for (std::size_t v = 0; v < h.rows(); ++v) {
    const auto hv = h.row(v);
    const auto qv = assignment.q.row(v);
    const auto dqv = dq.row(v);
    const double n = num::norm(hv);
    // Softmax jacobian: ds_i = q_i (dq_i - sum_j dq_j q_j) / tau.
    double inner = 0.0;
    for (std::size_t i = 0; i < qv.size(); ++i) inner += dqv[i] * qv[i];
    auto dhv = dh.row(v);
    double radial = 0.0;  // coefficient of h_v itself
    for (std::size_t i = 0; i < qv.size(); ++i) {
      const double ds = inv_tau * qv[i] * (dqv[i] - inner);
      // d cos / d h = (b_i - s_i * h/|h|) / |h|
      const auto bi = bank.rows.row(i);
      for (std::size_t t = 0; t < dhv.size(); ++t) dhv[t] += ds * bi[t] / n;
      radial += ds * s(v, i);
    }
    for (std::size_t t = 0; t < dhv.size(); ++t) {
      dhv[t] -= radial * hv[t] / (n * n);
    }
  }
  return dh;
}

}  // namespace stage::semantics
