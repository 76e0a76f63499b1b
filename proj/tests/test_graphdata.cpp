#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "stage/graph/graph.hpp"
#include "stage/graph/partition.hpp"
#include "stage/graph/perturb.hpp"
#include "stage/graph/split.hpp"
#include "stage/graph/synth.hpp"
#include "stage/num/rng.hpp"
#include "stage/wire/bytes.hpp"

using namespace stage;

namespace {

graph::SynthConfig small_cfg() {
  graph::SynthConfig cfg;
  cfg.node_count = 120;
  cfg.class_count = 3;
  cfg.p_in = 0.08;
  cfg.p_out = 0.01;
  cfg.client_modality_dims = {{8, 6}, {7, 5}};
  cfg.noise_std = 0.1;
  cfg.seed = 11;
  return cfg;
}

// Single-modality graph with hand-picked edges, for partition tests.
graph::MultimodalGraph plain_graph(
    std::uint32_t nodes, std::uint32_t classes,
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges,
    std::vector<std::uint32_t> labels) {
  graph::MultimodalGraph g;
  g.node_count = nodes;
  g.class_count = classes;
  g.modalities = {{0, 1}};
  g.features.emplace_back(nodes, 1);
  for (std::uint32_t v = 0; v < nodes; ++v) g.features[0](v, 0) = labels[v];
  g.masks.assign(nodes, 1);
  g.labels = std::move(labels);
  std::sort(edges.begin(), edges.end());
  g.edges = std::move(edges);
  g.validate();
  return g;
}

double intra_class_density(const graph::MultimodalGraph& g,
                           std::uint64_t* pairs_out) {
  std::uint64_t pairs = 0, hits = 0;
  std::set<std::pair<std::uint32_t, std::uint32_t>> es(g.edges.begin(),
                                                       g.edges.end());
  for (std::uint32_t u = 0; u < g.node_count; ++u) {
    for (std::uint32_t v = u + 1; v < g.node_count; ++v) {
      if (g.labels[u] != g.labels[v]) continue;
      ++pairs;
      if (es.count({u, v})) ++hits;
    }
  }
  *pairs_out = pairs;
  return static_cast<double>(hits) / static_cast<double>(pairs);
}

}  // namespace

TEST_CASE("generator honors forced topology limits") {
  auto cfg = small_cfg();
  cfg.class_count = 2;
  cfg.p_out = 0.0;
  auto g = graph::generate_synthetic_mag(cfg);
  g.validate();
  for (auto [u, v] : g.edges) CHECK(g.labels[u] == g.labels[v]);
}

TEST_CASE("zero noise and zero mask drop give identical class features") {
  auto cfg = small_cfg();
  cfg.noise_std = 0.0;
  cfg.mask_drop = 0.0;
  auto g = graph::generate_synthetic_mag(cfg);
  for (std::uint32_t c = 0; c < g.modality_count(); ++c) {
    // First node of each class is the reference row.
    std::vector<int> ref(cfg.class_count, -1);
    for (std::uint32_t v = 0; v < g.node_count; ++v) {
      auto& r = ref[g.labels[v]];
      if (r < 0) {
        r = static_cast<int>(v);
        continue;
      }
      auto a = g.features[c].row(v);
      auto b = g.features[c].row(static_cast<std::uint32_t>(r));
      for (std::size_t d = 0; d < a.size(); ++d) CHECK(a[d] == b[d]);
    }
  }
}

TEST_CASE("intra-class edge density concentrates around p_in") {
  graph::SynthConfig cfg;
  cfg.node_count = 400;
  cfg.class_count = 4;
  cfg.p_in = 0.05;
  cfg.p_out = 0.005;
  cfg.client_modality_dims = {{4}};
  cfg.seed = 1;
  auto g = graph::generate_synthetic_mag(cfg);
  std::uint64_t pairs = 0;
  const double density = intra_class_density(g, &pairs);
  const double sigma =
      std::sqrt(cfg.p_in * (1.0 - cfg.p_in) / static_cast<double>(pairs));
  CHECK(std::abs(density - cfg.p_in) < 3.0 * sigma);
}

TEST_CASE("generation is bit-identical in the seed") {
  auto a = graph::generate_synthetic_mag(small_cfg());
  auto b = graph::generate_synthetic_mag(small_cfg());
  CHECK(a == b);
  auto cfg = small_cfg();
  cfg.seed += 1;
  CHECK(graph::generate_synthetic_mag(cfg) != a);
}

TEST_CASE("generator invariants hold") {
  auto cfg = small_cfg();
  cfg.mask_drop = 0.4;
  auto g = graph::generate_synthetic_mag(cfg);
  g.validate();
  for (std::uint32_t v = 0; v < g.node_count; ++v) {
    bool any = false;
    for (std::uint32_t c = 0; c < g.modality_count(); ++c) {
      if (g.mask(v, c)) {
        any = true;
      } else {
        for (double x : g.features[c].row(v)) CHECK(x == 0.0);
      }
    }
    CHECK(any);
  }
}

TEST_CASE("generator rejects bad configs") {
  auto cfg = small_cfg();
  cfg.p_out = cfg.p_in + 0.1;
  CHECK_THROWS_AS(graph::generate_synthetic_mag(cfg), std::invalid_argument);
  cfg = small_cfg();
  cfg.class_count = 1;
  CHECK_THROWS_AS(graph::generate_synthetic_mag(cfg), std::invalid_argument);
  cfg = small_cfg();
  cfg.client_modality_dims = {{8, 0}};
  CHECK_THROWS_AS(graph::generate_synthetic_mag(cfg), std::invalid_argument);
}

TEST_CASE("disjoint cliques partition into their communities with zero cut") {
  const std::uint32_t k = 4, size = 10;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  std::vector<std::uint32_t> labels;
  for (std::uint32_t c = 0; c < k; ++c) {
    for (std::uint32_t i = 0; i < size; ++i) {
      labels.push_back(c);
      for (std::uint32_t j = i + 1; j < size; ++j) {
        edges.push_back({c * size + i, c * size + j});
      }
    }
  }
  auto g = plain_graph(k * size, k, edges, labels);
  auto part = graph::partition_communities(g, k, 5);
  CHECK(part.cut_size == 0);
  for (std::uint32_t c = 0; c < k; ++c) {
    // Each clique lands on a single client.
    for (std::uint32_t i = 1; i < size; ++i) {
      CHECK(part.assignments[c * size + i] == part.assignments[c * size]);
    }
  }
}

TEST_CASE("partitioners reject out-of-range client counts") {
  auto g = graph::generate_synthetic_mag(small_cfg());
  CHECK_THROWS_AS(graph::partition_communities(g, 1, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(graph::partition_edgecut(g, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(graph::partition_communities(g, g.node_count / 10 + 1, 0),
                  std::invalid_argument);
}

TEST_CASE("community partition beats random balanced partitions on SBM") {
  graph::SynthConfig cfg;
  cfg.node_count = 400;
  cfg.class_count = 4;
  cfg.p_in = 0.1;
  cfg.p_out = 0.001;
  cfg.client_modality_dims = {{4}};
  cfg.seed = 3;
  auto g = graph::generate_synthetic_mag(cfg);
  auto part = graph::partition_communities(g, 4, 9);

  num::Rng rng(num::derive_seed(9, "random_partitions"));
  std::vector<std::uint32_t> order(g.node_count);
  for (std::uint32_t v = 0; v < g.node_count; ++v) order[v] = v;
  double mean_cut = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    rng.shuffle(order);
    std::vector<std::uint32_t> assign(g.node_count);
    for (std::uint32_t i = 0; i < g.node_count; ++i) {
      assign[order[i]] = i / (g.node_count / 4);
    }
    mean_cut += static_cast<double>(graph::edge_cut(g, assign));
  }
  mean_cut /= 100.0;
  CHECK(static_cast<double>(part.cut_size) < mean_cut);
}

TEST_CASE("edgecut partition cuts a path once") {
  const std::uint32_t n = 40;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  std::vector<std::uint32_t> labels(n, 0);
  for (std::uint32_t v = 0; v + 1 < n; ++v) edges.push_back({v, v + 1});
  auto g = plain_graph(n, 2, edges, labels);
  for (std::uint32_t v = 0; v < n; ++v) g.labels[v] = v % 2;  // classes unused
  auto part = graph::partition_edgecut(g, 2, 13);
  CHECK(part.cut_size == 1);
}

TEST_CASE("refinement never increases the cut") {
  auto g = graph::generate_synthetic_mag(small_cfg());
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto assign = graph::grow_balanced_bfs(g, 3, seed);
    const std::uint64_t before = graph::edge_cut(g, assign);
    graph::refine_assignments(g, 3, assign);
    CHECK(graph::edge_cut(g, assign) <= before);
  }
}

TEST_CASE("edgecut strategy usually cuts no more than communities on SBM") {
  graph::SynthConfig cfg;
  cfg.node_count = 300;
  cfg.class_count = 4;
  cfg.p_in = 0.1;
  cfg.p_out = 0.001;
  cfg.client_modality_dims = {{4}};
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    cfg.seed = 100 + seed;
    auto g = graph::generate_synthetic_mag(cfg);
    auto by_cut = graph::partition_edgecut(g, 4, seed);
    auto by_comm = graph::partition_communities(g, 4, seed);
    if (by_cut.cut_size <= by_comm.cut_size) ++wins;
  }
  CHECK(wins >= 8);
}

TEST_CASE("partition balance stays within the contract band") {
  auto cfg = small_cfg();
  cfg.node_count = 350;
  cfg.seed = 21;
  auto g = graph::generate_synthetic_mag(cfg);
  for (std::uint32_t k : {3u, 5u, 7u}) {
    for (auto part : {graph::partition_communities(g, k, 2),
                      graph::partition_edgecut(g, k, 2)}) {
      std::size_t lo = g.node_count, hi = 0;
      for (const auto& m : part.members) {
        lo = std::min(lo, m.size());
        hi = std::max(hi, m.size());
      }
      CHECK(lo > 0);
      CHECK(static_cast<double>(hi) / static_cast<double>(lo) <= 1.5);
      const double target = static_cast<double>(g.node_count) / k;
      CHECK(static_cast<double>(hi) <= 1.2 * target + 1.0);
      CHECK(static_cast<double>(lo) >= 0.8 * target - 1.0);
    }
  }
}

TEST_CASE("partition views are consistent with assignments") {
  auto g = graph::generate_synthetic_mag(small_cfg());
  auto part = graph::partition_edgecut(g, 3, 4);
  std::vector<std::uint32_t> seen(g.node_count, 0);
  for (std::uint32_t k = 0; k < part.client_count; ++k) {
    CHECK(std::is_sorted(part.members[k].begin(), part.members[k].end()));
    for (auto v : part.members[k]) {
      CHECK(part.assignments[v] == k);
      seen[v]++;
    }
  }
  for (auto s : seen) CHECK(s == 1);

  // Local edges are exactly the intra-client global edges.
  std::uint64_t local_total = 0;
  for (const auto& le : part.local_edges) local_total += le.size();
  CHECK(local_total + part.cut_size == g.edges.size());
}

TEST_CASE("feature drift is a per-client per-modality constant shift") {
  auto cfg = small_cfg();
  cfg.noise_std = 0.0;
  cfg.mask_drop = 0.0;
  auto g = graph::generate_synthetic_mag(cfg);
  auto base = g;
  std::vector<std::uint32_t> assign(g.node_count);
  for (std::uint32_t v = 0; v < g.node_count; ++v) assign[v] = v % 2;
  auto part = graph::ClientPartition::from_assignments(g, assign, 2);

  auto untouched = g;
  auto dv0 = graph::apply_feature_drift(untouched, part, 0.0, 77);
  CHECK(untouched == base);
  for (const auto& per_client : dv0.bias) {
    for (const auto& b : per_client) {
      for (double x : b) CHECK(x == 0.0);
    }
  }

  auto dv = graph::apply_feature_drift(g, part, 1.0, 77);
  auto g2 = base;
  auto dv2 = graph::apply_feature_drift(g2, part, 1.0, 77);
  CHECK(g == g2);
  CHECK(dv.bias == dv2.bias);

  // Same-class centroid displacement across clients equals the bias gap.
  for (std::uint32_t c = 0; c < g.modality_count(); ++c) {
    const auto dim = g.modalities[c].dim;
    for (std::uint32_t cls = 0; cls < cfg.class_count; ++cls) {
      std::vector<double> mean0(dim, 0.0), mean1(dim, 0.0);
      std::size_t n0 = 0, n1 = 0;
      for (std::uint32_t v = 0; v < g.node_count; ++v) {
        if (g.labels[v] != cls) continue;
        auto& mean = assign[v] == 0 ? mean0 : mean1;
        (assign[v] == 0 ? n0 : n1)++;
        for (std::uint32_t d = 0; d < dim; ++d) mean[d] += g.features[c](v, d);
      }
      if (n0 == 0 || n1 == 0) continue;
      for (std::uint32_t d = 0; d < dim; ++d) {
        const double gap = mean0[d] / n0 - mean1[d] / n1;
        CHECK(gap == doctest::Approx(dv.bias[0][c][d] - dv.bias[1][c][d])
                         .epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("modality noise replaces the exact floor count") {
  auto cfg = small_cfg();
  cfg.node_count = 100;
  cfg.mask_drop = 0.0;
  auto g = graph::generate_synthetic_mag(cfg);
  auto base = g;

  auto none = graph::apply_modality_noise(g, 0.0, 5);
  CHECK(g == base);
  for (const auto& ids : none) CHECK(ids.empty());

  auto some = graph::apply_modality_noise(g, 0.3, 5);
  for (const auto& ids : some) {
    CHECK(ids.size() == 30);
    CHECK(std::is_sorted(ids.begin(), ids.end()));
  }

  g = base;
  auto all = graph::apply_modality_noise(g, 1.0, 5);
  for (std::uint32_t c = 0; c < g.modality_count(); ++c) {
    CHECK(all[c].size() == 100);
    for (std::uint32_t v = 0; v < g.node_count; ++v) {
      bool changed = false;
      for (std::uint32_t d = 0; d < g.modalities[c].dim; ++d) {
        if (g.features[c](v, d) != base.features[c](v, d)) changed = true;
      }
      CHECK(changed);
    }
  }
}

TEST_CASE("splits are stratified and deterministic") {
  auto cfg = small_cfg();
  cfg.node_count = 100;
  cfg.class_count = 2;
  cfg.p_out = 0.0;
  cfg.seed = 31;
  auto g = graph::generate_synthetic_mag(cfg);
  // Single client holding everything: a one-class census is then exact.
  for (auto& l : g.labels) l = 0;
  g.class_count = 2;
  auto part = graph::ClientPartition::from_assignments(
      g, std::vector<std::uint32_t>(g.node_count, 0), 1);
  graph::SplitFractions fr;
  auto tags = graph::split_train_val_test(g, part, fr, 17);
  std::size_t counts[3] = {0, 0, 0};
  for (auto t : tags) counts[static_cast<int>(t)]++;
  CHECK(counts[0] == 60);
  CHECK(counts[1] == 20);
  CHECK(counts[2] == 20);
  CHECK(tags == graph::split_train_val_test(g, part, fr, 17));

  // Stratification: per (client, class) the train share is within one node.
  auto g2 = graph::generate_synthetic_mag(small_cfg());
  auto part2 = graph::partition_edgecut(g2, 3, 1);
  auto tags2 = graph::split_train_val_test(g2, part2, fr, 17);
  for (std::uint32_t k = 0; k < 3; ++k) {
    for (std::uint32_t cls = 0; cls < g2.class_count; ++cls) {
      std::size_t total = 0, train = 0;
      for (auto v : part2.members[k]) {
        if (g2.labels[v] != cls) continue;
        ++total;
        if (tags2[v] == graph::Split::Train) ++train;
      }
      if (total < 3) {
        CHECK(train == total);  // tiny strata go entirely to train
      } else {
        CHECK(std::abs(static_cast<double>(train) - 0.6 * total) <= 1.0);
      }
    }
  }
}

TEST_CASE("graph container round-trips and rejects corruption") {
  auto g = graph::generate_synthetic_mag(small_cfg());
  // The container stores f32 features; write what it can represent.
  for (auto& f : g.features) {
    for (double& x : f.values()) x = static_cast<float>(x);
  }
  const std::string path = "test_graphdata_roundtrip.mag";
  graph::save_graph(g, path, 0xdeadbeef);
  auto loaded = graph::load_graph(path);
  CHECK(loaded.graph == g);
  CHECK(loaded.config_hash == 0xdeadbeef);

  auto bytes = wire::read_file(path);
  bytes[0] ^= 0xff;
  wire::write_file(path, bytes);
  CHECK_THROWS_AS(graph::load_graph(path), wire::ParseError);
  std::remove(path.c_str());
}
