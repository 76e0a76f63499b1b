#pragma once

#include <functional>
#include <span>
#include <vector>

#include "stage/num/param_store.hpp"

namespace stage::num {

// Central-difference gradient of a scalar function, one coordinate at a
// time. The oracle behind every backward pass in the library.
std::vector<double> finite_diff_grad(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> x, double h);

// Compares an analytic backward pass against finite differences over every
// parameter coordinate and every input coordinate.
//
//  loss:     evaluates the scalar given the current params/input
//  backward: zeroes grads, runs forward+backward, fills param grads and
//            returns dLoss/dInput
//
// Returns max over coordinates of |analytic - fd| / max(1, |fd|).
double grad_check(
    ParamStore& params, DenseMatrix& input,
    const std::function<double(const ParamStore&, const DenseMatrix&)>& loss,
    const std::function<DenseMatrix(ParamStore&, const DenseMatrix&)>&
        backward,
    double h = 1e-5);

}  // namespace stage::num
