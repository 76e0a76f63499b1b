#include "stage/server/controller.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>

#include "stage/num/rng.hpp"

namespace stage::server {

namespace {

constexpr std::size_t kHidden = 16;

double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }
double sigmoid(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                  : std::exp(x) / (1.0 + std::exp(x));
}

struct ForwardTrace {
  double hidden[kHidden];
  double raw;
};

ForwardTrace run_forward(const num::ParamStore& p,
                         const prop::ConflictSketch& d) {
  const double x[2] = {d.mean, d.stddev};
  if (!std::isfinite(x[0]) || !std::isfinite(x[1]) || x[0] < 0.0 || x[1] < 0.0) {
    throw std::invalid_argument("conflict sketch must be finite, nonnegative");
  }
  const auto& w1 = p.value("ctrl.w1");
  const auto& b1 = p.value("ctrl.b1");
  const auto& w2 = p.value("ctrl.w2");
  const auto& b2 = p.value("ctrl.b2");
  ForwardTrace t;
  t.raw = b2(0, 0);
  for (std::size_t j = 0; j < kHidden; ++j) {
    t.hidden[j] = std::tanh(w1(j, 0) * x[0] + w1(j, 1) * x[1] + b1(0, j));
    t.raw += w2(0, j) * t.hidden[j];
  }
  return t;
}

}  // namespace

MetaController make_meta_controller(std::uint64_t seed) {
  MetaController c;
  num::Rng rng(num::derive_seed(seed, "controller"));
  auto& w1 = c.params.create("ctrl.w1", kHidden, 2);
  const double scale = 1.0 / std::sqrt(2.0);
  for (double& x : w1.values()) x = scale * rng.normal();
  c.params.create("ctrl.b1", 1, kHidden);
  c.params.create("ctrl.w2", 1, kHidden);
  auto& b2 = c.params.create("ctrl.b2", 1, 1);
  // softplus(b2) = 1 - kTauMin, so the initial temperature is exactly 1.
  b2(0, 0) = std::log(std::expm1(1.0 - prop::kTauMin));
  return c;
}

prop::PropagationTemperature controller_forward(const MetaController& c,
                                                const prop::ConflictSketch& d) {
  const ForwardTrace t = run_forward(c.params, d);
  prop::PropagationTemperature out;
  out.value = prop::kTauMin + softplus(t.raw);
  out.source = prop::PropagationTemperature::Source::controller;
  return out;
}

void controller_backward(MetaController& c, const prop::ConflictSketch& d,
                         double upstream) {
  const ForwardTrace t = run_forward(c.params, d);
  const double draw = upstream * sigmoid(t.raw);
  const double x[2] = {d.mean, d.stddev};
  const auto& w2 = c.params.value("ctrl.w2");
  auto& dw1 = c.params.grad("ctrl.w1");
  auto& db1 = c.params.grad("ctrl.b1");
  auto& dw2 = c.params.grad("ctrl.w2");
  auto& db2 = c.params.grad("ctrl.b2");
  db2(0, 0) += draw;
  for (std::size_t j = 0; j < kHidden; ++j) {
    dw2(0, j) += draw * t.hidden[j];
    const double dpre = draw * w2(0, j) * (1.0 - t.hidden[j] * t.hidden[j]);
    dw1(j, 0) += dpre * x[0];
    dw1(j, 1) += dpre * x[1];
    db1(0, j) += dpre;
  }
}

std::vector<float> flatten_controller(const MetaController& c) {
  std::vector<float> out;
  out.reserve(kControllerParamCount);
  for (const auto& [name, entry] : c.params) {
    for (double v : entry.value.values()) out.push_back(static_cast<float>(v));
  }
  if (out.size() != kControllerParamCount) {
    throw std::invalid_argument("controller has unexpected parameter count");
  }
  return out;
}

MetaController controller_from_flat(std::span<const float> values) {
  if (values.size() != kControllerParamCount) {
    throw std::invalid_argument("controller blob must hold 65 values");
  }
  MetaController c;
  c.params.create("ctrl.b1", 1, kHidden);
  c.params.create("ctrl.b2", 1, 1);
  c.params.create("ctrl.w1", kHidden, 2);
  c.params.create("ctrl.w2", 1, kHidden);
  std::size_t i = 0;
  for (auto& [name, entry] : c.params) {
    for (double& v : entry.value.values()) v = values[i++];
  }
  return c;
}

std::size_t meta_update(MetaController& c, std::vector<MetaReport> reports,
                        double eta_pi, double g_max) {
  if (reports.empty()) throw std::invalid_argument("no meta reports");
  if (eta_pi <= 0.0 || g_max <= 0.0) {
    throw std::invalid_argument("eta_pi and g_max must be positive");
  }
  std::sort(reports.begin(), reports.end(),
            [](const MetaReport& a, const MetaReport& b) {
              return a.client_id < b.client_id;
            });
  c.params.zero_grads();
  std::size_t dropped = 0;
  for (const auto& report : reports) {
    if (!std::isfinite(report.g)) {
      std::cerr << "note: dropping non-finite meta-gradient from client "
                << report.client_id << "\n";
      ++dropped;
      continue;
    }
    const double g = std::clamp(report.g, -g_max, g_max);
    controller_backward(c, report.sketch, g);
  }
  c.params.sgd_step(eta_pi);
  return dropped;
}

}  // namespace stage::server
