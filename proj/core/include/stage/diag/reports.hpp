#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stage/num/matrix.hpp"
#include "stage/prop/adjacency.hpp"

namespace stage::diag {

// All report builders are pure: same inputs, byte-identical reports.

struct DriftPair {
  std::uint32_t class_id = 0;
  std::uint32_t client_a = 0;  // a < b
  std::uint32_t client_b = 0;
  double distance = 0.0;
};

struct ClassMeanDrift {
  std::uint32_t class_id = 0;
  double mean_distance = 0.0;
};

struct DriftReport {
  std::string layer_tag;
  std::vector<DriftPair> pairs;  // ascending (class, a, b)
  std::vector<ClassMeanDrift> class_means;
  double overall_mean = 0.0;
  bool empty = false;  // no class is shared by two clients at n_cent nodes
};

// Cross-client distance between class-centroid embeddings, per class and
// client pair. A (class, client) cell participates only with >= n_cent
// nodes. All clients must embed into the same dimension.
DriftReport centroid_drift(const std::vector<num::DenseMatrix>& embeddings,
                           const std::vector<std::vector<std::uint32_t>>& labels,
                           std::uint32_t n_cent, const std::string& layer_tag);

struct ClassGrowth {
  std::uint32_t class_id = 0;
  double growth_pct = 0.0;
  bool undefined = false;  // zero layer-0 mean
};

struct DriftGrowth {
  double overall_pct = 0.0;
  bool overall_undefined = false;
  std::vector<ClassGrowth> per_class;
};

// growth = (mean_L - mean_0) / mean_0 * 100. Reports must cover identical
// (class, pair) sets; mismatch throws std::invalid_argument.
DriftGrowth drift_growth(const DriftReport& layer0, const DriftReport& layer_l);

struct PurityEntry {
  std::uint32_t anchor = 0;
  std::uint32_t count = 0;
  std::uint32_t dominant_class = 0;
  double purity = 0.0;
  std::vector<double> class_distribution;  // length class_count, sums to 1
};

struct PurityReport {
  std::uint32_t class_count = 0;
  std::vector<PurityEntry> anchors;  // top-N activated, count-descending
};

// anchor_purity's top-N selection plus the full per-anchor class histogram.
PurityReport purity_report(const num::DenseMatrix& q,
                           const std::vector<std::uint32_t>& labels,
                           std::uint32_t class_count, std::uint32_t top_n);

struct PurityDeltaEntry {
  std::uint32_t anchor = 0;
  bool in_before = false;
  bool in_after = false;
  double gain = 0.0;          // defined only when present in both
  std::vector<double> delta;  // after - before distribution; empty otherwise
};

struct PurityDelta {
  std::vector<PurityDeltaEntry> entries;  // union of top anchors, ascending
};

// Per-anchor purity gains and assignment-distribution deltas over the union
// of both reports' top anchors. Shared-anchor delta rows sum to 0 (each
// distribution sums to 1); anchors present on one side only are marked.
PurityDelta purity_delta(const PurityReport& before, const PurityReport& after);

inline constexpr std::size_t kCalibrationBins = 20;

struct AttentionBucket {
  bool empty = true;
  std::uint64_t count = 0;
  double mean = 0.0;
  double stddev = 0.0;
  std::array<std::uint64_t, kCalibrationBins> histogram{};  // over [0, 1]
};

struct CalibrationReport {
  AttentionBucket homophilous;
  AttentionBucket heterophilous;
  double separation = 0.0;  // mean_homo - mean_hetero
  bool separation_defined = false;
};

// Buckets directed attention weights by endpoint-label equality. Self-loops
// are excluded here regardless of the input. weights[i] belongs to edges[i].
CalibrationReport attention_calibration(
    std::span<const double> weights,
    std::span<const std::pair<std::uint32_t, std::uint32_t>> edges,
    std::span<const std::uint32_t> labels);

struct EdgeAttention {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;  // directed v->u
  std::vector<double> weights;
};

// Flattens one layer's slot-aligned attention into directed edges,
// dropping self-loop slots.
EdgeAttention collect_attention(const prop::Adjacency& adj,
                                std::span<const double> alpha);

std::string to_json(const DriftReport& r);
std::string to_json(const DriftGrowth& r);
std::string to_json(const PurityReport& r);
std::string to_json(const PurityDelta& r);
std::string to_json(const CalibrationReport& r);

}  // namespace stage::diag
