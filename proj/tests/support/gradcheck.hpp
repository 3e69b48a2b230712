#pragma once

// Central finite-difference gradient checks.

#include "mcrg/tensor.hpp"

#include <functional>
#include <string>
#include <vector>

namespace oracle {

struct GradCheckResult {
    std::string name;
    double max_rel_error = 0;
    int checked = 0;
};

// Compares backward() on f() with (f(x+eps) - f(x-eps)) / 2eps for every
// element of every tensor in `wrt`. Relative error is
// |analytic - numeric| / max(|analytic|, |numeric|, 1e-6).
GradCheckResult gradcheck(const std::string& name, std::vector<mcrg::nn::Tensor> wrt,
                          const std::function<mcrg::nn::Tensor()>& f, double eps = 1e-5);

// Every differentiable operation, layer, head and loss on random inputs
// with dims <= 8 drawn from `seed`.
std::vector<GradCheckResult> gradient_suite(unsigned seed);

}  // namespace oracle
