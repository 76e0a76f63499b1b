#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "stage/graph/graph.hpp"

namespace stage::graph {

// Assignment of nodes to clients plus the derived per-client views.
// members[k] is sorted ascending; a node's local index on its client is its
// position in that list. local_edges keep the global sort order.
struct ClientPartition {
  std::uint32_t client_count = 0;
  std::vector<std::uint32_t> assignments;  // node -> client
  std::vector<std::vector<std::uint32_t>> members;
  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>>
      local_edges;
  std::uint64_t cut_size = 0;
  bool used_fallback = false;

  static ClientPartition from_assignments(const MultimodalGraph& g,
                                          std::vector<std::uint32_t> assign,
                                          std::uint32_t client_count);
};

std::uint64_t edge_cut(const MultimodalGraph& g,
                       const std::vector<std::uint32_t>& assign);

// Both strategies guarantee every client ends within +-20% of
// node_count / client_count and no client is empty. Preconditions:
// 2 <= client_count <= node_count / 10, else std::invalid_argument.
//
// Community strategy: label propagation, greedy packing of communities into
// clients, then a balance repair. Falls back to seeded BFS growth when
// propagation yields fewer communities than clients (reported via
// used_fallback and a stderr note).
ClientPartition partition_communities(const MultimodalGraph& g,
                                      std::uint32_t client_count,
                                      std::uint64_t seed);

// Edge-cut strategy: min-degree seeded BFS growth to balanced targets, then
// refine_assignments(). Deterministic in (g, client_count, seed).
ClientPartition partition_edgecut(const MultimodalGraph& g,
                                  std::uint32_t client_count,
                                  std::uint64_t seed);

// Growth stage alone, exposed so the refinement guarantee is testable.
std::vector<std::uint32_t> grow_balanced_bfs(const MultimodalGraph& g,
                                             std::uint32_t client_count,
                                             std::uint64_t seed);

// Local improvement: greedy single moves plus pairwise swap passes. Never
// increases the cut and preserves per-client sizes within the balance band.
void refine_assignments(const MultimodalGraph& g, std::uint32_t client_count,
                        std::vector<std::uint32_t>& assign);

}  // namespace stage::graph
