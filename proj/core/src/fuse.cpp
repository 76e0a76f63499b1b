#include "stage/semantics/fuse.hpp"

#include <cstring>

#include "stage/num/layers.hpp"

namespace stage::semantics {

num::DenseMatrix concat_masked(const graph::MultimodalGraph& g) {
  std::size_t total = 0;
  for (const auto& spec : g.modalities) total += spec.dim;
  num::DenseMatrix out(g.node_count, total);
  std::size_t offset = 0;
  for (std::uint32_t c = 0; c < g.modality_count(); ++c) {
    const auto& block = g.features[c];
    for (std::uint32_t v = 0; v < g.node_count; ++v) {
      std::memcpy(out.data() + v * total + offset, block.data() + v * block.cols(),
                  block.cols() * sizeof(double));
    }
    offset += g.modalities[c].dim;
  }
  return out;
}

FusedProjection fuse_and_project(const graph::MultimodalGraph& g,
                                 const num::ParamStore& params,
                                 const std::string& prefix) {
  FusedProjection out;
  out.inputs = concat_masked(g);
  out.embeddings = num::linear_forward(params, prefix, out.inputs);
  return out;
}

}  // namespace stage::semantics
