#include "stage/prop/sketch.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace stage::prop {

num::DenseMatrix neighborhood_context(const num::DenseMatrix& q,
                                      const Adjacency& adj,
                                      std::span<const double> weights) {
  if (q.rows() != adj.node_count()) {
    throw std::invalid_argument("assignment rows != node count");
  }
  if (weights.size() != adj.slot_count()) {
    throw std::invalid_argument("weight count != slot count");
  }
  num::DenseMatrix out(q.rows(), q.cols());
  for (std::uint32_t v = 0; v < adj.node_count(); ++v) {
    const auto nbrs = adj.neighbors(v);
    double total = 0.0;
    auto row = out.row(v);
    for (std::size_t s = 0; s < nbrs.size(); ++s) {
      const double w = weights[adj.slot_begin(v) + s];
      total += w;
      const auto qu = q.row(nbrs[s]);
      for (std::size_t i = 0; i < row.size(); ++i) row[i] += w * qu[i];
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw std::invalid_argument("weights not row-stochastic at node " +
                                  std::to_string(v));
    }
  }
  return out;
}

double js_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw std::invalid_argument("length mismatch in js_divergence");
  }
  // KL(p||m)/2 + KL(q||m)/2 with m the midpoint; 0 log 0 terms vanish.
  double js = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    if (p[i] > 0.0) js += 0.5 * p[i] * std::log(p[i] / m);
    if (q[i] > 0.0) js += 0.5 * q[i] * std::log(q[i] / m);
  }
  return std::max(js, 0.0);
}

ConflictSketch conflict_sketch(const num::DenseMatrix& q, const Adjacency& adj,
                               std::span<const double> weights) {
  const num::DenseMatrix context = neighborhood_context(q, adj, weights);
  const std::size_t n = q.rows();
  std::vector<double> d(n);
  for (std::size_t v = 0; v < n; ++v) {
    d[v] = js_divergence(q.row(v), context.row(v));
  }
  ConflictSketch sketch;
  for (double x : d) sketch.mean += x;
  sketch.mean /= static_cast<double>(n);
  double var = 0.0;
  for (double x : d) var += (x - sketch.mean) * (x - sketch.mean);
  sketch.stddev = std::sqrt(var / static_cast<double>(n));
  return sketch;
}

}  // namespace stage::prop
