#include "stage/graph/partition.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include "stage/num/rng.hpp"

namespace stage::graph {

namespace {

constexpr std::uint32_t kUnassigned = std::numeric_limits<std::uint32_t>::max();

std::vector<std::vector<std::uint32_t>> build_adjacency(
    const MultimodalGraph& g) {
  std::vector<std::vector<std::uint32_t>> adj(g.node_count);
  for (const auto& [u, v] : g.edges) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  // Sorted edges already yield ascending lists; keep the invariant explicit.
  for (auto& list : adj) std::sort(list.begin(), list.end());
  return adj;
}

void check_preconditions(const MultimodalGraph& g, std::uint32_t k) {
  if (k < 2) throw std::invalid_argument("client_count must be >= 2");
  if (static_cast<std::uint64_t>(k) * 10 > g.node_count) {
    throw std::invalid_argument("client_count must be <= node_count / 10");
  }
}

// Balance band: sizes must land in [lo, hi] around node_count / client_count.
struct Band {
  std::uint32_t lo;
  std::uint32_t hi;
};

Band balance_band(std::uint32_t n, std::uint32_t k) {
  const double avg = static_cast<double>(n) / k;
  auto lo = static_cast<std::uint32_t>(std::ceil(0.8 * avg - 1e-9));
  auto hi = static_cast<std::uint32_t>(std::floor(1.2 * avg + 1e-9));
  return {std::max<std::uint32_t>(lo, 1), hi};
}

std::vector<std::uint32_t> part_sizes(const std::vector<std::uint32_t>& assign,
                                      std::uint32_t k) {
  std::vector<std::uint32_t> sizes(k, 0);
  for (auto p : assign) ++sizes[p];
  return sizes;
}

// Moves nodes from the largest to the smallest part until both ends of the
// band hold, preferring moves that hurt the cut least.
void repair_balance(const MultimodalGraph& g, std::uint32_t k,
                    std::vector<std::uint32_t>& assign) {
  const auto adj = build_adjacency(g);
  const Band band = balance_band(g.node_count, k);
  auto sizes = part_sizes(assign, k);
  while (true) {
    std::uint32_t pmax = 0;
    std::uint32_t pmin = 0;
    for (std::uint32_t p = 1; p < k; ++p) {
      if (sizes[p] > sizes[pmax]) pmax = p;
      if (sizes[p] < sizes[pmin]) pmin = p;
    }
    if (sizes[pmax] <= band.hi && sizes[pmin] >= band.lo) break;

    std::uint32_t best = kUnassigned;
    long best_gain = std::numeric_limits<long>::min();
    for (std::uint32_t v = 0; v < g.node_count; ++v) {
      if (assign[v] != pmax) continue;
      long to_target = 0;
      long to_own = 0;
      for (auto u : adj[v]) {
        if (assign[u] == pmin) ++to_target;
        if (assign[u] == pmax) ++to_own;
      }
      const long gain = to_target - to_own;
      if (gain > best_gain) {
        best_gain = gain;
        best = v;
      }
    }
    assign[best] = pmin;
    --sizes[pmax];
    ++sizes[pmin];
  }
}

// Greedy single-node relocation: strictly cut-decreasing, band-preserving.
void relocate_pass(const std::vector<std::vector<std::uint32_t>>& adj,
                   std::uint32_t k, const Band& band,
                   std::vector<std::uint32_t>& assign,
                   std::vector<std::uint32_t>& sizes) {
  const auto n = static_cast<std::uint32_t>(assign.size());
  std::vector<long> cnt(k, 0);
  bool moved = true;
  while (moved) {
    moved = false;
    for (std::uint32_t v = 0; v < n; ++v) {
      const std::uint32_t p = assign[v];
      if (sizes[p] <= band.lo || sizes[p] <= 1) continue;
      std::fill(cnt.begin(), cnt.end(), 0);
      for (auto u : adj[v]) ++cnt[assign[u]];
      std::uint32_t best_q = p;
      long best_gain = 0;
      for (std::uint32_t q = 0; q < k; ++q) {
        if (q == p || sizes[q] + 1 > band.hi) continue;
        const long gain = cnt[q] - cnt[p];
        if (gain > best_gain) {
          best_gain = gain;
          best_q = q;
        }
      }
      if (best_q != p) {
        assign[v] = best_q;
        --sizes[p];
        ++sizes[best_q];
        moved = true;
      }
    }
  }
}

bool is_adjacent(const std::vector<std::vector<std::uint32_t>>& adj,
                 std::uint32_t u, std::uint32_t v) {
  const auto& list = adj[u];
  return std::binary_search(list.begin(), list.end(), v);
}

// Bounded Kernighan-Lin pass between parts p and q. Swaps preserve sizes;
// only the best strictly-positive prefix of tentative swaps is kept, so the
// cut cannot increase. Returns the realized gain.
long swap_pass(const std::vector<std::vector<std::uint32_t>>& adj,
               std::uint32_t p, std::uint32_t q,
               std::vector<std::uint32_t>& assign) {
  const auto n = static_cast<std::uint32_t>(assign.size());
  std::vector<std::uint32_t> side_p;
  std::vector<std::uint32_t> side_q;
  for (std::uint32_t v = 0; v < n; ++v) {
    if (assign[v] == p) side_p.push_back(v);
    if (assign[v] == q) side_q.push_back(v);
  }
  const std::size_t steps =
      std::min<std::size_t>({side_p.size(), side_q.size(), 64});
  if (steps == 0) return 0;

  auto gain_of = [&](std::uint32_t v, std::uint32_t from, std::uint32_t to) {
    long g = 0;
    for (auto u : adj[v]) {
      if (assign[u] == to) ++g;
      if (assign[u] == from) --g;
    }
    return g;
  };

  std::vector<char> locked(n, 0);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> swaps;
  long cum = 0;
  long best_cum = 0;
  std::size_t best_prefix = 0;
  for (std::size_t step = 0; step < steps; ++step) {
    std::uint32_t u_best = kUnassigned;
    long gu_best = std::numeric_limits<long>::min();
    for (auto u : side_p) {
      if (locked[u] || assign[u] != p) continue;
      const long gu = gain_of(u, p, q);
      if (gu > gu_best) {
        gu_best = gu;
        u_best = u;
      }
    }
    if (u_best == kUnassigned) break;
    std::uint32_t v_best = kUnassigned;
    long pair_best = std::numeric_limits<long>::min();
    for (auto v : side_q) {
      if (locked[v] || assign[v] != q) continue;
      const long gv = gain_of(v, q, p);
      const long pair = gv - 2 * (is_adjacent(adj, u_best, v) ? 1 : 0);
      if (pair > pair_best) {
        pair_best = pair;
        v_best = v;
      }
    }
    if (v_best == kUnassigned) break;
    assign[u_best] = q;
    assign[v_best] = p;
    locked[u_best] = 1;
    locked[v_best] = 1;
    swaps.emplace_back(u_best, v_best);
    cum += gu_best + pair_best;
    if (cum > best_cum) {
      best_cum = cum;
      best_prefix = swaps.size();
    }
  }
  // Roll back everything past the best strictly-positive prefix.
  while (swaps.size() > best_prefix) {
    const auto [u, v] = swaps.back();
    swaps.pop_back();
    assign[u] = p;
    assign[v] = q;
  }
  return best_cum;
}

}  // namespace

std::uint64_t edge_cut(const MultimodalGraph& g,
                       const std::vector<std::uint32_t>& assign) {
  std::uint64_t cut = 0;
  for (const auto& [u, v] : g.edges) {
    if (assign[u] != assign[v]) ++cut;
  }
  return cut;
}

ClientPartition ClientPartition::from_assignments(
    const MultimodalGraph& g, std::vector<std::uint32_t> assign,
    std::uint32_t client_count) {
  if (assign.size() != g.node_count) {
    throw std::invalid_argument("assignment size != node count");
  }
  ClientPartition part;
  part.client_count = client_count;
  part.members.resize(client_count);
  part.local_edges.resize(client_count);
  std::vector<std::uint32_t> local_idx(g.node_count, 0);
  for (std::uint32_t v = 0; v < g.node_count; ++v) {
    const std::uint32_t p = assign[v];
    if (p >= client_count) {
      throw std::invalid_argument("client id out of range in assignment");
    }
    local_idx[v] = static_cast<std::uint32_t>(part.members[p].size());
    part.members[p].push_back(v);
  }
  for (const auto& [u, v] : g.edges) {
    if (assign[u] == assign[v]) {
      part.local_edges[assign[u]].emplace_back(local_idx[u], local_idx[v]);
    } else {
      ++part.cut_size;
    }
  }
  part.assignments = std::move(assign);
  return part;
}

std::vector<std::uint32_t> grow_balanced_bfs(const MultimodalGraph& g,
                                             std::uint32_t client_count,
                                             std::uint64_t seed) {
  const std::uint32_t n = g.node_count;
  const auto adj = build_adjacency(g);
  std::vector<std::uint32_t> assign(n, kUnassigned);
  std::vector<std::uint64_t> prio(n);
  num::Rng rng(num::derive_seed(seed, "grow"));
  for (auto& x : prio) x = rng.next_u64();

  std::uint32_t remaining = n;
  for (std::uint32_t part = 0; part < client_count; ++part) {
    std::uint32_t quota = n / client_count + (part < n % client_count ? 1 : 0);
    std::deque<std::uint32_t> frontier;
    while (quota > 0 && remaining > 0) {
      if (frontier.empty()) {
        // Fresh seed: fewest unassigned neighbors, ties by random priority.
        std::uint32_t best = kUnassigned;
        std::uint64_t best_deg = 0;
        for (std::uint32_t v = 0; v < n; ++v) {
          if (assign[v] != kUnassigned) continue;
          std::uint64_t deg = 0;
          for (auto u : adj[v]) {
            if (assign[u] == kUnassigned) ++deg;
          }
          if (best == kUnassigned || deg < best_deg ||
              (deg == best_deg && prio[v] < prio[best])) {
            best = v;
            best_deg = deg;
          }
        }
        assign[best] = part;
        --quota;
        --remaining;
        frontier.push_back(best);
        continue;
      }
      const std::uint32_t v = frontier.front();
      frontier.pop_front();
      for (auto u : adj[v]) {
        if (quota == 0) break;
        if (assign[u] == kUnassigned) {
          assign[u] = part;
          --quota;
          --remaining;
          frontier.push_back(u);
        }
      }
    }
  }
  return assign;
}

void refine_assignments(const MultimodalGraph& g, std::uint32_t client_count,
                        std::vector<std::uint32_t>& assign) {
  const auto adj = build_adjacency(g);
  const Band band = balance_band(g.node_count, client_count);
  auto sizes = part_sizes(assign, client_count);
  for (int round = 0; round < 8; ++round) {
    relocate_pass(adj, client_count, band, assign, sizes);
    long gained = 0;
    for (std::uint32_t p = 0; p < client_count; ++p) {
      for (std::uint32_t q = p + 1; q < client_count; ++q) {
        gained += swap_pass(adj, p, q, assign);
      }
    }
    if (gained == 0) break;
  }
}

ClientPartition partition_edgecut(const MultimodalGraph& g,
                                  std::uint32_t client_count,
                                  std::uint64_t seed) {
  check_preconditions(g, client_count);
  auto assign = grow_balanced_bfs(g, client_count, seed);
  refine_assignments(g, client_count, assign);
  return ClientPartition::from_assignments(g, std::move(assign), client_count);
}

ClientPartition partition_communities(const MultimodalGraph& g,
                                      std::uint32_t client_count,
                                      std::uint64_t seed) {
  check_preconditions(g, client_count);
  const std::uint32_t n = g.node_count;
  const auto adj = build_adjacency(g);

  // Label propagation; ties adopt the smallest label so runs are stable.
  std::vector<std::uint32_t> labels(n);
  std::iota(labels.begin(), labels.end(), 0);
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  num::Rng rng(num::derive_seed(seed, "labelprop"));
  for (int sweep = 0; sweep < 50; ++sweep) {
    rng.shuffle(order);
    bool changed = false;
    for (auto v : order) {
      if (adj[v].empty()) continue;
      std::map<std::uint32_t, std::uint32_t> freq;
      for (auto u : adj[v]) ++freq[labels[u]];
      std::uint32_t best = labels[v];
      std::uint32_t best_count = 0;
      for (const auto& [label, count] : freq) {
        if (count > best_count) {
          best = label;
          best_count = count;
        }
      }
      if (best != labels[v]) {
        labels[v] = best;
        changed = true;
      }
    }
    if (!changed) break;
  }

  std::map<std::uint32_t, std::vector<std::uint32_t>> communities;
  for (std::uint32_t v = 0; v < n; ++v) communities[labels[v]].push_back(v);

  bool fallback = communities.size() < client_count;
  std::vector<std::uint32_t> assign(n, kUnassigned);
  if (fallback) {
    std::cerr << "note: label propagation found " << communities.size()
              << " communities for " << client_count
              << " clients; falling back to BFS growth\n";
    assign = grow_balanced_bfs(g, client_count, seed);
  } else {
    // Pack communities largest-first onto the currently smallest client.
    std::vector<const std::vector<std::uint32_t>*> ordered;
    ordered.reserve(communities.size());
    for (const auto& [label, nodes] : communities) ordered.push_back(&nodes);
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const auto* a, const auto* b) {
                       if (a->size() != b->size()) return a->size() > b->size();
                       return a->front() < b->front();
                     });
    std::vector<std::uint32_t> sizes(client_count, 0);
    for (const auto* nodes : ordered) {
      std::uint32_t target = 0;
      for (std::uint32_t p = 1; p < client_count; ++p) {
        if (sizes[p] < sizes[target]) target = p;
      }
      for (auto v : *nodes) assign[v] = target;
      sizes[target] += static_cast<std::uint32_t>(nodes->size());
    }
  }

  repair_balance(g, client_count, assign);
  auto part =
      ClientPartition::from_assignments(g, std::move(assign), client_count);
  part.used_fallback = fallback;
  return part;
}

}  // namespace stage::graph
