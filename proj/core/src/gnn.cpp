#include "stage/prop/gnn.hpp"

#include <cmath>
#include <stdexcept>

#include "stage/prop/attention.hpp"

namespace stage::prop {

namespace {

std::string layer_name(const std::string& prefix, std::size_t l,
                       const char* part) {
  return prefix + ".l" + std::to_string(l) + "." + part;
}

double elu(double x) { return x > 0.0 ? x : std::expm1(x); }
double elu_grad(double x) { return x > 0.0 ? 1.0 : std::exp(x); }

}  // namespace

void gnn_init(num::ParamStore& params, const std::string& prefix,
              const GnnConfig& cfg, num::Rng& rng) {
  if (cfg.layer_count() == 0) throw std::invalid_argument("empty GNN config");
  for (std::size_t l = 0; l < cfg.layer_count(); ++l) {
    const std::size_t in = cfg.dims[l];
    const std::size_t out = cfg.dims[l + 1];
    auto& w = params.create(layer_name(prefix, l, "weight"), out, in);
    const double wscale = 1.0 / std::sqrt(static_cast<double>(in));
    for (double& x : w.values()) x = wscale * rng.normal();
    auto& a = params.create(layer_name(prefix, l, "attn"), 1, 2 * out);
    const double ascale = 1.0 / std::sqrt(static_cast<double>(2 * out));
    for (double& x : a.values()) x = ascale * rng.normal();
  }
}

GnnTrace gnn_forward(const num::ParamStore& params, const std::string& prefix,
                     const GnnConfig& cfg, const Adjacency& adj,
                     const num::DenseMatrix& h0, double tau_k) {
  if (h0.cols() != cfg.dims.front()) {
    throw std::invalid_argument("input dim != first layer dim");
  }
  if (h0.rows() != adj.node_count()) {
    throw std::invalid_argument("input rows != node count");
  }
  GnnTrace trace;
  trace.tau = tau_k;
  num::DenseMatrix h = h0;
  for (std::size_t l = 0; l < cfg.layer_count(); ++l) {
    GnnLayerTrace t;
    t.input = std::move(h);
    const auto& w = params.value(layer_name(prefix, l, "weight"));
    const auto& a = params.value(layer_name(prefix, l, "attn"));
    t.z = t.input.matmul_transposed(w);
    const std::size_t out = t.z.cols();

    // c_vu = a1 . z_v + a2 . z_u, split into per-node halves.
    const std::span<const double> a1(a.data(), out);
    const std::span<const double> a2(a.data() + out, out);
    std::vector<double> src(t.z.rows());
    std::vector<double> dst(t.z.rows());
    for (std::size_t v = 0; v < t.z.rows(); ++v) {
      src[v] = num::dot(a1, t.z.row(v));
      dst[v] = num::dot(a2, t.z.row(v));
    }
    t.logits.resize(adj.slot_count());
    for (std::uint32_t v = 0; v < adj.node_count(); ++v) {
      const auto nbrs = adj.neighbors(v);
      for (std::size_t s = 0; s < nbrs.size(); ++s) {
        const double c = src[v] + dst[nbrs[s]];
        t.logits[adj.slot_begin(v) + s] =
            c > 0.0 ? c : cfg.leaky_slope * c;
      }
    }
    t.alpha = regulated_attention(t.logits, adj, tau_k);

    t.preact = num::DenseMatrix(t.z.rows(), out);
    for (std::uint32_t v = 0; v < adj.node_count(); ++v) {
      const auto nbrs = adj.neighbors(v);
      auto sv = t.preact.row(v);
      for (std::size_t s = 0; s < nbrs.size(); ++s) {
        const double w_s = t.alpha[adj.slot_begin(v) + s];
        const auto zu = t.z.row(nbrs[s]);
        for (std::size_t i = 0; i < out; ++i) sv[i] += w_s * zu[i];
      }
    }
    t.output = num::DenseMatrix(t.preact.rows(), out);
    for (std::size_t i = 0; i < t.preact.size(); ++i) {
      t.output.data()[i] = elu(t.preact.data()[i]);
    }
    h = t.output;
    trace.layers.push_back(std::move(t));
  }
  return trace;
}

GnnBackwardResult gnn_backward(num::ParamStore& params,
                               const std::string& prefix, const GnnConfig& cfg,
                               const Adjacency& adj, const GnnTrace& trace,
                               const num::DenseMatrix& dout) {
  if (trace.layers.size() != cfg.layer_count()) {
    throw std::invalid_argument("trace does not match config");
  }
  GnnBackwardResult result;
  const double tau = trace.tau;
  num::DenseMatrix dh = dout;
  for (std::size_t l = cfg.layer_count(); l-- > 0;) {
    const GnnLayerTrace& t = trace.layers[l];
    if (!dh.same_shape(t.output)) {
      throw std::invalid_argument("gradient shape mismatch at layer " +
                                  std::to_string(l));
    }
    const auto& w = params.value(layer_name(prefix, l, "weight"));
    const auto& a = params.value(layer_name(prefix, l, "attn"));
    const std::size_t out = t.z.cols();
    const std::span<const double> a1(a.data(), out);
    const std::span<const double> a2(a.data() + out, out);

    // Through the ELU.
    num::DenseMatrix ds(dh.rows(), dh.cols());
    for (std::size_t i = 0; i < ds.size(); ++i) {
      ds.data()[i] = dh.data()[i] * elu_grad(t.preact.data()[i]);
    }

    // Through the attention-weighted sum: alpha and z both receive gradient.
    num::DenseMatrix dz(t.z.rows(), out);
    std::vector<double> dalpha(adj.slot_count(), 0.0);
    for (std::uint32_t v = 0; v < adj.node_count(); ++v) {
      const auto nbrs = adj.neighbors(v);
      const auto dsv = ds.row(v);
      for (std::size_t s = 0; s < nbrs.size(); ++s) {
        const std::size_t slot = adj.slot_begin(v) + s;
        const auto zu = t.z.row(nbrs[s]);
        dalpha[slot] = num::dot(dsv, zu);
        auto dzu = dz.row(nbrs[s]);
        const double w_s = t.alpha[slot];
        for (std::size_t i = 0; i < out; ++i) dzu[i] += w_s * dsv[i];
      }
    }

    // Through the tempered softmax; logits t_i = e_i / tau.
    std::vector<double> dsrc(t.z.rows(), 0.0);
    std::vector<double> ddst(t.z.rows(), 0.0);
    auto& da = params.grad(layer_name(prefix, l, "attn"));
    for (std::uint32_t v = 0; v < adj.node_count(); ++v) {
      const auto nbrs = adj.neighbors(v);
      const std::size_t begin = adj.slot_begin(v);
      double inner = 0.0;
      for (std::size_t s = 0; s < nbrs.size(); ++s) {
        inner += dalpha[begin + s] * t.alpha[begin + s];
      }
      for (std::size_t s = 0; s < nbrs.size(); ++s) {
        const std::size_t slot = begin + s;
        const double dt = t.alpha[slot] * (dalpha[slot] - inner);
        result.dtau -= dt * t.logits[slot] / (tau * tau);
        const double de = dt / tau;
        const double dc =
            de * (t.logits[slot] > 0.0 ? 1.0 : cfg.leaky_slope);
        dsrc[v] += dc;
        ddst[nbrs[s]] += dc;
      }
    }

    // c_vu = a1 . z_v + a2 . z_u: fan out into the attention vector and z.
    for (std::size_t x = 0; x < t.z.rows(); ++x) {
      const auto zx = t.z.row(x);
      auto dzx = dz.row(x);
      for (std::size_t i = 0; i < out; ++i) {
        da(0, i) += dsrc[x] * zx[i];
        da(0, out + i) += ddst[x] * zx[i];
        dzx[i] += dsrc[x] * a1[i] + ddst[x] * a2[i];
      }
    }

    // z = input * W^T.
    auto& dw = params.grad(layer_name(prefix, l, "weight"));
    const num::DenseMatrix dwl = dz.transposed().matmul(t.input);
    dw.add_scaled(dwl, 1.0);
    dh = dz.matmul(w);
  }
  result.dinput = std::move(dh);
  return result;
}

double dirichlet_energy(
    const num::DenseMatrix& h,
    std::span<const std::pair<std::uint32_t, std::uint32_t>> edges) {
  double energy = 0.0;
  for (const auto& [u, v] : edges) {
    const auto hu = h.row(u);
    const auto hv = h.row(v);
    for (std::size_t i = 0; i < hu.size(); ++i) {
      const double d = hu[i] - hv[i];
      energy += d * d;
    }
  }
  return energy;
}

}  // namespace stage::prop
