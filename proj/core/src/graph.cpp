#include "stage/graph/graph.hpp"

#include <cmath>
#include <stdexcept>

#include "nlohmann/json.hpp"
#include "stage/wire/bytes.hpp"

namespace stage::graph {

namespace {

void fail(const std::string& what) { throw std::invalid_argument(what); }

}  // namespace

void MultimodalGraph::validate() const {
  const std::size_t m = modalities.size();
  if (m == 0) fail("graph has no modalities");
  if (features.size() != m) fail("feature block count != modality count");
  for (std::size_t c = 0; c < m; ++c) {
    if (features[c].rows() != node_count) {
      fail("feature rows != node count for modality " + std::to_string(c));
    }
    if (features[c].cols() != modalities[c].dim) {
      fail("feature cols != modality dim for modality " + std::to_string(c));
    }
    if (!features[c].all_finite()) {
      fail("non-finite feature value in modality " + std::to_string(c));
    }
  }
  if (masks.size() != static_cast<std::size_t>(node_count) * m) {
    fail("mask size != node_count * modality_count");
  }
  if (labels.size() != node_count) fail("label count != node count");
  for (std::uint32_t v = 0; v < node_count; ++v) {
    if (labels[v] >= class_count) {
      fail("label out of range at node " + std::to_string(v));
    }
    bool any = false;
    for (std::uint32_t c = 0; c < m; ++c) {
      if (mask(v, c)) {
        any = true;
      } else {
        const auto row = features[c].row(v);
        for (double x : row) {
          if (x != 0.0) {
            fail("masked-off row not all-zero at node " + std::to_string(v) +
                 " modality " + std::to_string(c));
          }
        }
      }
    }
    if (!any) fail("node " + std::to_string(v) + " has no available modality");
  }
  std::pair<std::uint32_t, std::uint32_t> prev{0, 0};
  bool first = true;
  for (const auto& [u, v] : edges) {
    if (u >= v) fail("edge not stored with u < v");
    if (v >= node_count) fail("edge endpoint out of range");
    if (!first && std::pair{u, v} <= prev) fail("edges not sorted unique");
    prev = {u, v};
    first = false;
  }
}

void save_graph(const MultimodalGraph& g, const std::string& path,
                std::uint32_t config_hash) {
  g.validate();
  wire::ByteWriter w;
  w.magic("MAG1");
  w.u32(1);  // version
  w.u32(config_hash);
  w.u32(g.node_count);
  w.u32(g.class_count);
  w.u32(g.modality_count());
  for (const auto& spec : g.modalities) {
    w.u32(spec.id);
    w.u32(spec.dim);
  }
  for (const auto& block : g.features) {
    for (double x : block.values()) w.f32(static_cast<float>(x));
  }
  w.bytes(g.masks);
  for (std::uint32_t y : g.labels) w.u32(y);
  w.u32(static_cast<std::uint32_t>(g.edges.size()));
  for (const auto& [u, v] : g.edges) {
    w.u32(u);
    w.u32(v);
  }
  wire::write_file(path, w.buffer());
}

LoadedGraph load_graph(const std::string& path) {
  const auto data = wire::read_file(path);
  wire::ByteReader r(data);
  r.expect_magic("MAG1");
  const std::uint32_t version = r.u32();
  if (version != 1) {
    throw wire::ParseError(r.offset() - 4,
                           "unsupported MAG1 version " + std::to_string(version));
  }
  LoadedGraph out;
  out.config_hash = r.u32();
  MultimodalGraph& g = out.graph;
  g.node_count = r.u32();
  g.class_count = r.u32();
  const std::uint32_t m = r.u32();
  g.modalities.resize(m);
  for (auto& spec : g.modalities) {
    spec.id = r.u32();
    spec.dim = r.u32();
  }
  g.features.reserve(m);
  for (std::uint32_t c = 0; c < m; ++c) {
    num::DenseMatrix block(g.node_count, g.modalities[c].dim);
    for (double& x : block.values()) x = static_cast<double>(r.f32());
    g.features.push_back(std::move(block));
  }
  g.masks = r.raw(static_cast<std::size_t>(g.node_count) * m);
  g.labels.resize(g.node_count);
  for (auto& y : g.labels) y = r.u32();
  const std::uint32_t edge_count = r.u32();
  g.edges.resize(edge_count);
  for (auto& [u, v] : g.edges) {
    u = r.u32();
    v = r.u32();
  }
  r.expect_end();
  g.validate();
  return out;
}

void export_jsonl(const MultimodalGraph& g, std::ostream& out) {
  for (std::uint32_t v = 0; v < g.node_count; ++v) {
    nlohmann::json rec;
    rec["type"] = "node";
    rec["id"] = v;
    rec["label"] = g.labels[v];
    auto mask = nlohmann::json::array();
    auto feats = nlohmann::json::object();
    for (std::uint32_t c = 0; c < g.modality_count(); ++c) {
      const bool on = g.mask(v, c);
      mask.push_back(on ? 1 : 0);
      if (on) {
        auto row = g.features[c].row(v);
        feats[std::to_string(g.modalities[c].id)] =
            std::vector<double>(row.begin(), row.end());
      }
    }
    rec["mask"] = std::move(mask);
    rec["features"] = std::move(feats);
    out << rec.dump() << '\n';
  }
  for (const auto& [u, v] : g.edges) {
    nlohmann::json rec;
    rec["type"] = "edge";
    rec["u"] = u;
    rec["v"] = v;
    out << rec.dump() << '\n';
  }
}

}  // namespace stage::graph
