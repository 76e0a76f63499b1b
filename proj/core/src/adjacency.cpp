#include "stage/prop/adjacency.hpp"

#include <algorithm>
#include <stdexcept>

namespace stage::prop {

Adjacency make_adjacency(
    std::uint32_t node_count,
    std::span<const std::pair<std::uint32_t, std::uint32_t>> edges) {
  std::vector<std::vector<std::uint32_t>> lists(node_count);
  for (const auto& [u, v] : edges) {
    if (u >= node_count || v >= node_count) {
      throw std::invalid_argument("edge endpoint out of range");
    }
    if (u == v) throw std::invalid_argument("self-loops are implicit");
    lists[u].push_back(v);
    lists[v].push_back(u);
  }
  Adjacency adj;
  adj.offsets.resize(node_count + 1, 0);
  for (std::uint32_t v = 0; v < node_count; ++v) {
    std::sort(lists[v].begin(), lists[v].end());
    adj.offsets[v + 1] =
        adj.offsets[v] + static_cast<std::uint32_t>(lists[v].size()) + 1;
  }
  adj.targets.reserve(adj.offsets.back());
  for (std::uint32_t v = 0; v < node_count; ++v) {
    adj.targets.push_back(v);  // self-loop first
    adj.targets.insert(adj.targets.end(), lists[v].begin(), lists[v].end());
  }
  return adj;
}

std::vector<double> uniform_weights(const Adjacency& adj) {
  std::vector<double> w(adj.slot_count());
  for (std::uint32_t v = 0; v < adj.node_count(); ++v) {
    const auto nbrs = adj.neighbors(v);
    const double inv = 1.0 / static_cast<double>(nbrs.size());
    for (std::size_t s = 0; s < nbrs.size(); ++s) {
      w[adj.slot_begin(v) + s] = inv;
    }
  }
  return w;
}

}  // namespace stage::prop
