#pragma once

#include "stage/graph/graph.hpp"
#include "stage/num/matrix.hpp"
#include "stage/num/param_store.hpp"

namespace stage::semantics {

// Concatenation of the per-modality feature blocks in modality order.
// Masked-off blocks are all-zero by the graph invariant, so this is the
// masked fusion: missing modalities contribute nothing.
num::DenseMatrix concat_masked(const graph::MultimodalGraph& g);

struct FusedProjection {
  num::DenseMatrix inputs;      // node_count x sum of modality dims
  num::DenseMatrix embeddings;  // node_count x d_p
};

// Trainable linear projector over the concatenated blocks. The projector
// params live under `prefix` in the store (see num::linear_init); backward
// runs through num::linear_backward with the returned inputs.
FusedProjection fuse_and_project(const graph::MultimodalGraph& g,
                                 const num::ParamStore& params,
                                 const std::string& prefix);

}  // namespace stage::semantics
