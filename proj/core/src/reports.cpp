#include "stage/diag/reports.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "json.hpp"
#include "stage/semantics/losses.hpp"

namespace stage::diag {

namespace {

using ordered_json = nlohmann::ordered_json;

std::uint32_t max_label(const std::vector<std::vector<std::uint32_t>>& labels) {
  std::uint32_t m = 0;
  for (const auto& l : labels) {
    for (auto y : l) m = std::max(m, y);
  }
  return m;
}

void accumulate_bucket(AttentionBucket& b, std::span<const double> values) {
  if (values.empty()) return;
  b.empty = false;
  b.count = values.size();
  double sum = 0.0;
  for (double v : values) sum += v;
  b.mean = sum / static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - b.mean) * (v - b.mean);
  b.stddev = std::sqrt(var / static_cast<double>(values.size()));
  for (double v : values) {
    auto bin = static_cast<std::size_t>(v * kCalibrationBins);
    if (bin >= kCalibrationBins) bin = kCalibrationBins - 1;
    ++b.histogram[bin];
  }
}

ordered_json bucket_to_json(const AttentionBucket& b) {
  ordered_json j;
  j["empty"] = b.empty;
  j["count"] = b.count;
  if (!b.empty) {
    j["mean"] = b.mean;
    j["stddev"] = b.stddev;
    j["histogram"] = b.histogram;
  }
  return j;
}

}  // namespace

DriftReport centroid_drift(const std::vector<num::DenseMatrix>& embeddings,
                           const std::vector<std::vector<std::uint32_t>>& labels,
                           std::uint32_t n_cent, const std::string& layer_tag) {
  if (embeddings.size() != labels.size()) {
    throw std::invalid_argument("need one label list per client");
  }
  if (embeddings.size() < 2) {
    throw std::invalid_argument("centroid drift needs >= 2 clients");
  }
  if (n_cent == 0) throw std::invalid_argument("n_cent must be positive");
  const std::size_t dim = embeddings.front().cols();
  for (std::size_t k = 0; k < embeddings.size(); ++k) {
    if (embeddings[k].cols() != dim) {
      throw std::invalid_argument("clients disagree on embedding dimension");
    }
    if (embeddings[k].rows() != labels[k].size()) {
      throw std::invalid_argument("labels do not match embedding rows");
    }
  }

  const std::uint32_t classes = max_label(labels) + 1;
  const auto clients = static_cast<std::uint32_t>(embeddings.size());
  // centroid[k][c] with counts; only cells at n_cent participate.
  std::vector<std::vector<num::DenseMatrix>> centroid(clients);
  std::vector<std::vector<std::uint32_t>> counts(clients);
  for (std::uint32_t k = 0; k < clients; ++k) {
    centroid[k].assign(classes, num::DenseMatrix(1, dim));
    counts[k].assign(classes, 0);
    for (std::size_t v = 0; v < labels[k].size(); ++v) {
      const auto y = labels[k][v];
      auto row = centroid[k][y].row(0);
      const auto src = embeddings[k].row(v);
      for (std::size_t d = 0; d < dim; ++d) row[d] += src[d];
      ++counts[k][y];
    }
    for (std::uint32_t y = 0; y < classes; ++y) {
      if (counts[k][y] == 0) continue;
      auto row = centroid[k][y].row(0);
      for (double& x : row) x /= counts[k][y];
    }
  }

  DriftReport report;
  report.layer_tag = layer_tag;
  for (std::uint32_t y = 0; y < classes; ++y) {
    double class_sum = 0.0;
    std::uint32_t class_pairs = 0;
    for (std::uint32_t a = 0; a < clients; ++a) {
      if (counts[a][y] < n_cent) continue;
      for (std::uint32_t b = a + 1; b < clients; ++b) {
        if (counts[b][y] < n_cent) continue;
        double d2 = 0.0;
        const auto ra = centroid[a][y].row(0);
        const auto rb = centroid[b][y].row(0);
        for (std::size_t d = 0; d < dim; ++d) {
          d2 += (ra[d] - rb[d]) * (ra[d] - rb[d]);
        }
        const double dist = std::sqrt(d2);
        report.pairs.push_back({y, a, b, dist});
        class_sum += dist;
        ++class_pairs;
      }
    }
    if (class_pairs > 0) {
      report.class_means.push_back({y, class_sum / class_pairs});
    }
  }
  if (report.pairs.empty()) {
    report.empty = true;
    return report;
  }
  double total = 0.0;
  for (const auto& p : report.pairs) total += p.distance;
  report.overall_mean = total / static_cast<double>(report.pairs.size());
  return report;
}

DriftGrowth drift_growth(const DriftReport& layer0,
                         const DriftReport& layer_l) {
  if (layer0.pairs.size() != layer_l.pairs.size()) {
    throw std::invalid_argument("drift reports cover different pair sets");
  }
  for (std::size_t i = 0; i < layer0.pairs.size(); ++i) {
    const auto& a = layer0.pairs[i];
    const auto& b = layer_l.pairs[i];
    if (a.class_id != b.class_id || a.client_a != b.client_a ||
        a.client_b != b.client_b) {
      throw std::invalid_argument("drift reports cover different pair sets");
    }
  }
  DriftGrowth g;
  for (std::size_t i = 0; i < layer0.class_means.size(); ++i) {
    const auto& before = layer0.class_means[i];
    const auto& after = layer_l.class_means[i];
    ClassGrowth cg;
    cg.class_id = before.class_id;
    if (before.mean_distance == 0.0) {
      cg.undefined = true;
    } else {
      cg.growth_pct =
          (after.mean_distance - before.mean_distance) / before.mean_distance *
          100.0;
    }
    g.per_class.push_back(cg);
  }
  if (layer0.overall_mean == 0.0) {
    g.overall_undefined = true;
  } else {
    g.overall_pct = (layer_l.overall_mean - layer0.overall_mean) /
                    layer0.overall_mean * 100.0;
  }
  return g;
}

PurityReport purity_report(const num::DenseMatrix& q,
                           const std::vector<std::uint32_t>& labels,
                           std::uint32_t class_count, std::uint32_t top_n) {
  const auto top = semantics::anchor_purity(q, labels, top_n);
  const auto hard = semantics::hard_assignments(q);
  PurityReport report;
  report.class_count = class_count;
  for (const auto& t : top) {
    PurityEntry e;
    e.anchor = t.anchor;
    e.count = t.count;
    e.dominant_class = t.dominant_class;
    e.purity = t.purity;
    e.class_distribution.assign(class_count, 0.0);
    for (std::size_t v = 0; v < hard.size(); ++v) {
      if (hard[v] == t.anchor) e.class_distribution[labels[v]] += 1.0;
    }
    for (double& x : e.class_distribution) x /= t.count;
    report.anchors.push_back(std::move(e));
  }
  return report;
}

PurityDelta purity_delta(const PurityReport& before, const PurityReport& after) {
  if (before.class_count != after.class_count) {
    throw std::invalid_argument("purity reports disagree on class count");
  }
  std::map<std::uint32_t, std::pair<const PurityEntry*, const PurityEntry*>>
      merged;
  for (const auto& e : before.anchors) merged[e.anchor].first = &e;
  for (const auto& e : after.anchors) merged[e.anchor].second = &e;
  PurityDelta out;
  for (const auto& [anchor, pair] : merged) {
    PurityDeltaEntry e;
    e.anchor = anchor;
    e.in_before = pair.first != nullptr;
    e.in_after = pair.second != nullptr;
    if (e.in_before && e.in_after) {
      e.gain = pair.second->purity - pair.first->purity;
      e.delta.resize(before.class_count);
      for (std::uint32_t c = 0; c < before.class_count; ++c) {
        e.delta[c] = pair.second->class_distribution[c] -
                     pair.first->class_distribution[c];
      }
    }
    out.entries.push_back(std::move(e));
  }
  return out;
}

CalibrationReport attention_calibration(
    std::span<const double> weights,
    std::span<const std::pair<std::uint32_t, std::uint32_t>> edges,
    std::span<const std::uint32_t> labels) {
  if (weights.size() != edges.size()) {
    throw std::invalid_argument("one weight per edge required");
  }
  std::vector<double> homo, hetero;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto [u, v] = edges[i];
    if (u == v) continue;  // self-loops never count
    if (u >= labels.size() || v >= labels.size()) {
      throw std::invalid_argument("edge endpoint out of label range");
    }
    (labels[u] == labels[v] ? homo : hetero).push_back(weights[i]);
  }
  CalibrationReport report;
  accumulate_bucket(report.homophilous, homo);
  accumulate_bucket(report.heterophilous, hetero);
  if (!report.homophilous.empty && !report.heterophilous.empty) {
    report.separation = report.homophilous.mean - report.heterophilous.mean;
    report.separation_defined = true;
  }
  return report;
}

EdgeAttention collect_attention(const prop::Adjacency& adj,
                                std::span<const double> alpha) {
  if (alpha.size() != adj.slot_count()) {
    throw std::invalid_argument("alpha does not match adjacency slots");
  }
  EdgeAttention out;
  for (std::uint32_t v = 0; v < adj.node_count(); ++v) {
    const auto neigh = adj.neighbors(v);
    const auto base = adj.slot_begin(v);
    for (std::size_t s = 0; s < neigh.size(); ++s) {
      if (neigh[s] == v) continue;
      out.edges.emplace_back(v, neigh[s]);
      out.weights.push_back(alpha[base + s]);
    }
  }
  return out;
}

std::string to_json(const DriftReport& r) {
  ordered_json j;
  j["layer"] = r.layer_tag;
  j["empty"] = r.empty;
  j["overall_mean"] = r.overall_mean;
  ordered_json classes = ordered_json::array();
  for (const auto& c : r.class_means) {
    classes.push_back({{"class", c.class_id}, {"mean", c.mean_distance}});
  }
  j["class_means"] = std::move(classes);
  ordered_json pairs = ordered_json::array();
  for (const auto& p : r.pairs) {
    pairs.push_back({{"class", p.class_id},
                     {"client_a", p.client_a},
                     {"client_b", p.client_b},
                     {"distance", p.distance}});
  }
  j["pairs"] = std::move(pairs);
  return j.dump(2) + "\n";
}

std::string to_json(const DriftGrowth& r) {
  ordered_json j;
  j["overall_undefined"] = r.overall_undefined;
  if (!r.overall_undefined) j["overall_pct"] = r.overall_pct;
  ordered_json classes = ordered_json::array();
  for (const auto& c : r.per_class) {
    ordered_json e;
    e["class"] = c.class_id;
    e["undefined"] = c.undefined;
    if (!c.undefined) e["growth_pct"] = c.growth_pct;
    classes.push_back(std::move(e));
  }
  j["per_class"] = std::move(classes);
  return j.dump(2) + "\n";
}

std::string to_json(const PurityReport& r) {
  ordered_json j;
  j["class_count"] = r.class_count;
  ordered_json anchors = ordered_json::array();
  for (const auto& a : r.anchors) {
    anchors.push_back({{"anchor", a.anchor},
                       {"count", a.count},
                       {"dominant_class", a.dominant_class},
                       {"purity", a.purity},
                       {"class_distribution", a.class_distribution}});
  }
  j["anchors"] = std::move(anchors);
  return j.dump(2) + "\n";
}

std::string to_json(const PurityDelta& r) {
  ordered_json entries = ordered_json::array();
  for (const auto& e : r.entries) {
    ordered_json o;
    o["anchor"] = e.anchor;
    o["in_before"] = e.in_before;
    o["in_after"] = e.in_after;
    if (e.in_before && e.in_after) {
      o["gain"] = e.gain;
      o["delta"] = e.delta;
    }
    entries.push_back(std::move(o));
  }
  ordered_json j;
  j["entries"] = std::move(entries);
  return j.dump(2) + "\n";
}

std::string to_json(const CalibrationReport& r) {
  ordered_json j;
  j["homophilous"] = bucket_to_json(r.homophilous);
  j["heterophilous"] = bucket_to_json(r.heterophilous);
  j["separation_defined"] = r.separation_defined;
  if (r.separation_defined) j["separation"] = r.separation;
  return j.dump(2) + "\n";
}

}  // namespace stage::diag
