#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace stage::prop {

// CSR neighborhoods over an undirected edge list. Every node's list starts
// with the mandatory self-loop, followed by neighbors ascending; this slot
// order is the alignment contract for per-edge logits and weights.
struct Adjacency {
  std::vector<std::uint32_t> offsets;  // node_count + 1
  std::vector<std::uint32_t> targets;

  std::uint32_t node_count() const {
    return static_cast<std::uint32_t>(offsets.size() - 1);
  }
  std::span<const std::uint32_t> neighbors(std::uint32_t v) const {
    return {targets.data() + offsets[v],
            static_cast<std::size_t>(offsets[v + 1] - offsets[v])};
  }
  std::size_t slot_count() const { return targets.size(); }
  std::uint32_t slot_begin(std::uint32_t v) const { return offsets[v]; }
};

Adjacency make_adjacency(
    std::uint32_t node_count,
    std::span<const std::pair<std::uint32_t, std::uint32_t>> edges);

// Uniform row-stochastic weights: 1/|N(v)| per slot, self-loop included.
std::vector<double> uniform_weights(const Adjacency& adj);

}  // namespace stage::prop
