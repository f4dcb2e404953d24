#include "hopqg/nn/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "hopqg/rng.hpp"

namespace hopqg::nn {

GradCheckResult grad_check(const std::function<Tensor()>& f, const std::vector<Tensor>& wrt, double eps,
                           double floor) {
  for (Tensor t : wrt) t.zero_grad();
  f().backward();
  std::vector<std::vector<double>> analytic;
  for (const Tensor& t : wrt) analytic.emplace_back(t.grad().begin(), t.grad().end());

  GradCheckResult result;
  NoGradGuard guard;
  for (std::size_t p = 0; p < wrt.size(); ++p) {
    Tensor t = wrt[p];
    auto values = t.mutable_values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + eps;
      const double up = f().item();
      values[i] = saved - eps;
      const double down = f().item();
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double a = analytic[p][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), floor});
      result.max_relative_error = std::max(result.max_relative_error, std::abs(a - numeric) / denom);
      ++result.checked;
    }
  }
  return result;
}

Tensor random_tensor(std::size_t rows, std::size_t cols, std::uint64_t seed, double scale) {
  Rng rng(seed);
  std::vector<double> v(rows * cols);
  for (double& x : v) x = rng.uniform(-scale, scale);
  return Tensor({rows, cols}, std::move(v), true);
}

}  // namespace hopqg::nn
