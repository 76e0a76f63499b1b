#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "stage/num/matrix.hpp"

namespace stage::graph {

struct ModalitySpec {
  std::uint32_t id = 0;
  std::uint32_t dim = 0;

  bool operator==(const ModalitySpec&) const = default;
};

// Attributed multimodal graph. Feature storage is rectangular per modality;
// per-node availability lives in `masks`. Invariants (see validate()):
//   - edges are undirected, stored once with u < v, sorted, no self loops
//   - masked-off feature rows are all-zero
//   - every node has at least one available modality
struct MultimodalGraph {
  std::uint32_t node_count = 0;
  std::uint32_t class_count = 0;
  std::vector<ModalitySpec> modalities;
  std::vector<num::DenseMatrix> features;  // per modality: node_count x dim
  std::vector<std::uint8_t> masks;         // node_count x modality_count, 0/1
  std::vector<std::uint32_t> labels;       // node_count
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;

  std::uint32_t modality_count() const {
    return static_cast<std::uint32_t>(modalities.size());
  }
  bool mask(std::uint32_t v, std::uint32_t c) const {
    return masks[static_cast<std::size_t>(v) * modalities.size() + c] != 0;
  }
  void set_mask(std::uint32_t v, std::uint32_t c, bool on) {
    masks[static_cast<std::size_t>(v) * modalities.size() + c] = on ? 1 : 0;
  }

  // Throws std::invalid_argument naming the first violated invariant.
  void validate() const;

  bool operator==(const MultimodalGraph&) const = default;
};

// Binary container round-trip. The config hash ties the file to the
// generating configuration; loaders surface it for provenance checks.
void save_graph(const MultimodalGraph& g, const std::string& path,
                std::uint32_t config_hash);

struct LoadedGraph {
  MultimodalGraph graph;
  std::uint32_t config_hash = 0;
};
LoadedGraph load_graph(const std::string& path);

// Human-readable debug export: one JSON object per line, nodes then edges.
void export_jsonl(const MultimodalGraph& g, std::ostream& out);

}  // namespace stage::graph
