#include "stage/prop/attention.hpp"

#include <stdexcept>

#include "stage/num/ops.hpp"

namespace stage::prop {

std::vector<double> regulated_attention(std::span<const double> edge_logits,
                                        const Adjacency& adj, double tau_k) {
  if (edge_logits.size() != adj.slot_count()) {
    throw std::invalid_argument("logit count != slot count");
  }
  if (tau_k < kTauMin) {
    throw std::invalid_argument("tau_k below the temperature floor");
  }
  std::vector<double> alpha(edge_logits.begin(), edge_logits.end());
  for (std::uint32_t v = 0; v < adj.node_count(); ++v) {
    const auto begin = adj.slot_begin(v);
    const auto count = adj.neighbors(v).size();
    num::softmax_span(std::span<double>(alpha.data() + begin, count), tau_k);
  }
  return alpha;
}

}  // namespace stage::prop
