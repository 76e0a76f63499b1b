#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "stage/num/param_store.hpp"
#include "stage/prop/attention.hpp"
#include "stage/prop/sketch.hpp"

namespace stage::server {

// Sketch-to-temperature perceptron: 2 -> 16 (tanh) -> 1, then
// tau = kTauMin + softplus(raw). 2*16 + 16 + 16 + 1 = 65 parameters.
inline constexpr std::size_t kControllerParamCount = 65;

struct MetaController {
  num::ParamStore params;
};

// Hidden layer seeded Gaussian; output layer starts at zero weights with the
// bias chosen so every input maps to tau = 1 before any meta-update.
MetaController make_meta_controller(std::uint64_t seed);

prop::PropagationTemperature controller_forward(const MetaController& c,
                                                const prop::ConflictSketch& d);

// Accumulates upstream * d tau / d theta into the controller grads.
void controller_backward(MetaController& c, const prop::ConflictSketch& d,
                         double upstream);

struct MetaReport {
  std::uint32_t client_id = 0;
  prop::ConflictSketch sketch;
  double g = 0.0;  // scalar meta-gradient dL_val/dtau
};

// theta <- theta - eta_pi * sum_k clip(g_k) * dtau/dtheta at D_k. Reports are
// processed in client-id order so the update is permutation-invariant;
// non-finite g_k reports are dropped (logged). Returns the dropped count.
std::size_t meta_update(MetaController& c, std::vector<MetaReport> reports,
                        double eta_pi, double g_max);

// Broadcast form: kControllerParamCount floats, entries in name order.
std::vector<float> flatten_controller(const MetaController& c);
MetaController controller_from_flat(std::span<const float> values);

}  // namespace stage::server
