#pragma once

#include <functional>
#include <vector>

#include "hopqg/nn/tensor.hpp"

namespace hopqg::nn {

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t checked = 0;  // number of scalar coordinates compared
};

// Compares the analytic gradient of f with respect to every entry of each
// tensor in wrt against central differences with step eps. The relative
// error of one coordinate is |a - n| / max(|a|, |n|, floor).
GradCheckResult grad_check(const std::function<Tensor()>& f, const std::vector<Tensor>& wrt, double eps = 1e-5,
                           double floor = 1e-3);

// Random tensor with entries uniform in [-scale, scale), requiring gradients.
Tensor random_tensor(std::size_t rows, std::size_t cols, std::uint64_t seed, double scale = 1.0);

}  // namespace hopqg::nn
