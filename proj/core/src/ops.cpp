#include "stage/num/ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "stage/num/errors.hpp"

namespace stage::num {

void softmax_span(std::span<double> logits, double temperature) {
  double max_logit = -std::numeric_limits<double>::infinity();
  for (double v : logits) max_logit = std::max(max_logit, v);
  double sum = 0.0;
  for (double& v : logits) {
    v = std::exp((v - max_logit) / temperature);
    sum += v;
  }
  for (double& v : logits) v /= sum;
}

DenseMatrix softmax_rows(const DenseMatrix& logits, double temperature) {
  if (!(temperature > 0.0)) {
    throw std::invalid_argument("softmax_rows: temperature must be positive");
  }
  if (!logits.all_finite()) {
    throw NonFiniteError("softmax_rows: non-finite logits");
  }
  DenseMatrix out = logits;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    softmax_span(out.row(r), temperature);
  }
  return out;
}

double cosine_similarity(std::span<const double> a,
                         std::span<const double> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("cosine_similarity: length mismatch");
  }
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0) {
    throw DegenerateInputError("cosine_similarity: zero-norm vector");
  }
  return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

}  // namespace stage::num
