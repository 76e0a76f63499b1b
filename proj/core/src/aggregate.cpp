#include "stage/server/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "stage/num/matrix.hpp"

namespace stage::server {

semantics::GlobalAnchorPrototypes update_gap(
    const semantics::GlobalAnchorPrototypes& gap,
    std::vector<GapUpload> uploads, double m_ema) {
  if (uploads.empty()) throw std::invalid_argument("no uploads");
  if (!(m_ema >= 0.0 && m_ema < 1.0)) {
    throw std::invalid_argument("m_ema must be in [0, 1)");
  }
  const std::size_t m = gap.rows.rows();
  const std::size_t d = gap.rows.cols();
  std::sort(uploads.begin(), uploads.end(),
            [](const GapUpload& a, const GapUpload& b) {
              return a.client_id < b.client_id;
            });

  num::DenseMatrix weighted(m, d);
  std::vector<double> total(m, 0.0);
  for (const auto& upload : uploads) {
    const auto& stats = upload.stats;
    for (std::size_t s = 0; s < stats.anchor_ids.size(); ++s) {
      const std::uint32_t i = stats.anchor_ids[s];
      if (i >= m || stats.means.cols() != d) {
        throw std::invalid_argument("upload stats do not match prototypes");
      }
      const double count = stats.counts[s];
      auto acc = weighted.row(i);
      const auto mu = stats.means.row(s);
      for (std::size_t t = 0; t < d; ++t) acc[t] += count * mu[t];
      total[i] += count;
    }
  }

  semantics::GlobalAnchorPrototypes next;
  next.rows = gap.rows;
  next.round = gap.round;
  for (std::size_t i = 0; i < m; ++i) {
    if (total[i] <= 0.0) continue;
    auto row = next.rows.row(i);
    const auto agg = weighted.row(i);
    for (std::size_t t = 0; t < d; ++t) {
      row[t] = m_ema * row[t] + (1.0 - m_ema) * agg[t] / total[i];
    }
    const double n = num::norm(row);
    if (n <= 1e-12) {
      // Degenerate cancellation: keep the previous unit-norm row.
      const auto prev = gap.rows.row(i);
      std::copy(prev.begin(), prev.end(), row.begin());
      continue;
    }
    for (double& x : row) x /= n;
  }
  return next;
}

num::ParamStore aggregate_fedavg(
    const std::vector<const num::ParamStore*>& stores,
    const std::vector<double>& weights) {
  if (stores.empty() || stores.size() != weights.size()) {
    throw std::invalid_argument("stores/weights size mismatch");
  }
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw std::invalid_argument("negative weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("weights must sum to 1");
  }

  // Entry -> list of (store index, value).
  std::map<std::string, std::vector<std::size_t>> holders;
  for (std::size_t s = 0; s < stores.size(); ++s) {
    for (const auto& [name, entry] : *stores[s]) {
      holders[name].push_back(s);
    }
  }

  num::ParamStore out;
  for (const auto& [name, who] : holders) {
    const auto& first = stores[who.front()]->value(name);
    auto& value = out.create(name, first.rows(), first.cols());
    if (who.size() < stores.size()) {
      value = first;  // not shared by everyone: pass through untouched
      continue;
    }
    for (std::size_t s = 0; s < stores.size(); ++s) {
      const auto& v = stores[s]->value(name);
      if (!v.same_shape(first)) {
        throw std::invalid_argument("shape mismatch on shared entry " + name);
      }
      value.add_scaled(v, weights[s]);
    }
  }
  return out;
}

}  // namespace stage::server
