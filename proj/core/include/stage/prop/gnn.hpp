#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stage/num/matrix.hpp"
#include "stage/num/param_store.hpp"
#include "stage/num/rng.hpp"
#include "stage/prop/adjacency.hpp"

namespace stage::prop {

// Single-head attention GNN. Layer l maps dims[l] -> dims[l+1] with
// parameters "<prefix>.l<l>.weight" (out x in) and "<prefix>.l<l>.attn"
// (1 x 2*out). One shared temperature regulates every layer's attention.
struct GnnConfig {
  std::vector<std::size_t> dims;  // [d_in, d_1, ..., d_L]
  double leaky_slope = 0.2;

  std::size_t layer_count() const { return dims.empty() ? 0 : dims.size() - 1; }
};

void gnn_init(num::ParamStore& params, const std::string& prefix,
              const GnnConfig& cfg, num::Rng& rng);

// Everything the backward pass needs, kept per layer.
struct GnnLayerTrace {
  num::DenseMatrix input;      // H_l
  num::DenseMatrix z;          // input * W^T
  std::vector<double> logits;  // slot-aligned e_vu, before temperature
  std::vector<double> alpha;   // slot-aligned attention weights
  num::DenseMatrix preact;     // sum of alpha-weighted z rows
  num::DenseMatrix output;     // elu(preact) = H_{l+1}
};

struct GnnTrace {
  std::vector<GnnLayerTrace> layers;
  double tau = 1.0;

  const num::DenseMatrix& output() const { return layers.back().output; }
  // Embedding after l rounds of propagation; l = 0 is the input.
  const num::DenseMatrix& embedding(std::size_t l) const {
    return l == 0 ? layers.front().input : layers[l - 1].output;
  }
};

GnnTrace gnn_forward(const num::ParamStore& params, const std::string& prefix,
                     const GnnConfig& cfg, const Adjacency& adj,
                     const num::DenseMatrix& h0, double tau_k);

struct GnnBackwardResult {
  num::DenseMatrix dinput;
  double dtau = 0.0;  // analytic dL/dtau_k, summed over layers
};

// Accumulates parameter gradients into the store and returns input/tau
// gradients. `dout` is dL/dH_L for the trace's final output.
GnnBackwardResult gnn_backward(num::ParamStore& params,
                               const std::string& prefix, const GnnConfig& cfg,
                               const Adjacency& adj, const GnnTrace& trace,
                               const num::DenseMatrix& dout);

// Sum over stored undirected edges of squared row differences; equals
// trace(H^T L H) for the combinatorial Laplacian.
double dirichlet_energy(
    const num::DenseMatrix& h,
    std::span<const std::pair<std::uint32_t, std::uint32_t>> edges);

}  // namespace stage::prop
