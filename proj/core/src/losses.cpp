#include "stage/semantics/losses.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "stage/num/ops.hpp"

namespace stage::semantics {

EntropyLossResult entropy_loss(const num::DenseMatrix& q) {
  if (q.empty()) throw std::invalid_argument("empty assignment matrix");
  const std::size_t n = q.rows();
  const std::size_t m = q.cols();
  std::vector<double> qbar(m, 0.0);
  for (std::size_t v = 0; v < n; ++v) {
    const auto row = q.row(v);
    for (std::size_t i = 0; i < m; ++i) qbar[i] += row[i];
  }
  for (double& x : qbar) x /= static_cast<double>(n);

  EntropyLossResult out;
  out.dq = num::DenseMatrix(n, m);
  for (std::size_t i = 0; i < m; ++i) {
    const double lg = num::guarded_log(qbar[i]);
    out.loss += qbar[i] * lg;
    // d/dQ[v][i] of qbar_i (lg + ...) = (lg + 1)/n, constant down each column.
    const double g = (lg + 1.0) / static_cast<double>(n);
    for (std::size_t v = 0; v < n; ++v) out.dq(v, i) = g;
  }
  return out;
}

std::vector<std::uint32_t> hard_assignments(const num::DenseMatrix& q) {
  std::vector<std::uint32_t> out(q.rows());
  for (std::size_t v = 0; v < q.rows(); ++v) {
    const auto row = q.row(v);
    std::size_t best = 0;
    for (std::size_t i = 1; i < row.size(); ++i) {
      if (row[i] > row[best]) best = i;
    }
    out[v] = static_cast<std::uint32_t>(best);
  }
  return out;
}

AnchorStats anchor_conditional_means(const num::DenseMatrix& h,
                                     const num::DenseMatrix& q,
                                     std::uint32_t n_min) {
  if (h.rows() != q.rows()) {
    throw std::invalid_argument("embedding/assignment row mismatch");
  }
  const auto owner = hard_assignments(q);
  std::vector<std::uint32_t> counts(q.cols(), 0);
  for (auto i : owner) ++counts[i];

  AnchorStats stats;
  for (std::uint32_t i = 0; i < q.cols(); ++i) {
    if (counts[i] >= n_min && counts[i] > 0) {
      stats.anchor_ids.push_back(i);
      stats.counts.push_back(counts[i]);
    }
  }
  stats.means = num::DenseMatrix(stats.anchor_ids.size(), h.cols());
  std::vector<std::uint32_t> slot(q.cols(), 0);
  for (std::size_t s = 0; s < stats.anchor_ids.size(); ++s) {
    slot[stats.anchor_ids[s]] = static_cast<std::uint32_t>(s);
  }
  std::vector<bool> active(q.cols(), false);
  for (auto i : stats.anchor_ids) active[i] = true;
  for (std::size_t v = 0; v < h.rows(); ++v) {
    if (!active[owner[v]]) continue;
    auto mean = stats.means.row(slot[owner[v]]);
    const auto hv = h.row(v);
    for (std::size_t t = 0; t < mean.size(); ++t) mean[t] += hv[t];
  }
  for (std::size_t s = 0; s < stats.anchor_ids.size(); ++s) {
    auto mean = stats.means.row(s);
    for (double& x : mean) x /= static_cast<double>(stats.counts[s]);
  }
  return stats;
}

GapLossResult gap_loss(const AnchorStats& stats,
                       const GlobalAnchorPrototypes& gap, double tau_c) {
  if (tau_c <= 0.0) throw std::invalid_argument("tau_c must be > 0");
  GapLossResult out;
  const std::size_t active = stats.anchor_ids.size();
  out.dmeans = num::DenseMatrix(active, gap.rows.cols());
  if (active == 0) {
    out.skipped = true;
    return out;
  }
  const std::size_t m = gap.rows.rows();
  const double inv_active = 1.0 / static_cast<double>(active);
  std::vector<double> cos(m, 0.0);
  std::vector<double> logits(m, 0.0);
  for (std::size_t s = 0; s < active; ++s) {
    const auto mu = stats.means.row(s);
    const double n = num::norm(mu);
    for (std::size_t j = 0; j < m; ++j) {
      cos[j] = num::cosine_similarity(mu, gap.rows.row(j));
      logits[j] = cos[j] / tau_c;
    }
    std::vector<double> p = logits;
    num::softmax_span(p, 1.0);
    const std::uint32_t target = stats.anchor_ids[s];
    out.loss -= inv_active * num::guarded_log(p[target]);

    // d(-log p_target)/d s_j = p_j - [j == target]; chain through cosine.
    auto dmu = out.dmeans.row(s);
    double radial = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double ds =
          inv_active * (p[j] - (j == target ? 1.0 : 0.0)) / tau_c;
      const auto hj = gap.rows.row(j);
      for (std::size_t t = 0; t < dmu.size(); ++t) dmu[t] += ds * hj[t] / n;
      radial += ds * cos[j];
    }
    for (std::size_t t = 0; t < dmu.size(); ++t) {
      dmu[t] -= radial * mu[t] / (n * n);
    }
  }
  return out;
}

std::vector<AnchorPurity> anchor_purity(const num::DenseMatrix& q,
                                        const std::vector<std::uint32_t>& labels,
                                        std::uint32_t top_n) {
  if (labels.size() != q.rows()) {
    throw std::invalid_argument("label count != assignment rows");
  }
  if (top_n > q.cols()) {
    throw std::invalid_argument("top_n exceeds anchor count");
  }
  const auto owner = hard_assignments(q);
  // anchor -> class -> count
  std::map<std::uint32_t, std::map<std::uint32_t, std::uint32_t>> hist;
  for (std::size_t v = 0; v < owner.size(); ++v) {
    ++hist[owner[v]][labels[v]];
  }
  std::vector<AnchorPurity> all;
  for (const auto& [anchor, classes] : hist) {
    AnchorPurity p;
    p.anchor = anchor;
    for (const auto& [cls, count] : classes) p.count += count;
    std::uint32_t best_count = 0;
    for (const auto& [cls, count] : classes) {
      if (count > best_count) {
        best_count = count;
        p.dominant_class = cls;
      }
    }
    p.purity = static_cast<double>(best_count) / static_cast<double>(p.count);
    all.push_back(p);
  }
  std::stable_sort(all.begin(), all.end(),
                   [](const AnchorPurity& a, const AnchorPurity& b) {
                     if (a.count != b.count) return a.count > b.count;
                     return a.anchor < b.anchor;
                   });
  if (all.size() > top_n) all.resize(top_n);
  return all;
}

}  // namespace stage::semantics
