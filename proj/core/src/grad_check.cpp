#include "stage/num/grad_check.hpp"

#include <cmath>
#include <stdexcept>

namespace stage::num {

std::vector<double> finite_diff_grad(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> x, double h) {
  if (!(h > 0.0)) {
    throw std::invalid_argument("finite_diff_grad: step must be positive");
  }
  std::vector<double> point(x.begin(), x.end());
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < point.size(); ++i) {
    const double saved = point[i];
    point[i] = saved + h;
    const double up = f(point);
    point[i] = saved - h;
    const double down = f(point);
    point[i] = saved;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw std::runtime_error("finite_diff_grad: function returned non-finite value");
    }
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

namespace {

double relative_error(double analytic, double fd) {
  return std::abs(analytic - fd) / std::max(1.0, std::abs(fd));
}

// Perturbs one buffer coordinate-wise, comparing fd slopes of `loss`
// against the analytic gradient buffer.
double check_buffer(
    double* values, const double* analytic, std::size_t n,
    const std::function<double()>& loss, double h) {
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double saved = values[i];
    values[i] = saved + h;
    const double up = loss();
    values[i] = saved - h;
    const double down = loss();
    values[i] = saved;
    const double fd = (up - down) / (2.0 * h);
    worst = std::max(worst, relative_error(analytic[i], fd));
  }
  return worst;
}

}  // namespace

double grad_check(
    ParamStore& params, DenseMatrix& input,
    const std::function<double(const ParamStore&, const DenseMatrix&)>& loss,
    const std::function<DenseMatrix(ParamStore&, const DenseMatrix&)>&
        backward,
    double h) {
  params.zero_grads();
  const DenseMatrix input_grad = backward(params, input);
  if (!input_grad.same_shape(input)) {
    throw std::invalid_argument("grad_check: backward returned wrong input-grad shape");
  }

  const auto eval = [&]() { return loss(params, input); };

  double worst = check_buffer(input.data(), input_grad.data(), input.size(),
                              eval, h);
  for (auto& [name, entry] : params) {
    worst = std::max(worst,
                     check_buffer(entry.value.data(), entry.grad.data(),
                                  entry.value.size(), eval, h));
  }
  return worst;
}

}  // namespace stage::num
