#include "hopqg/nn/optim.hpp"

#include <cmath>

#include "hopqg/error.hpp"

namespace hopqg::nn {

Adam::Adam(const ParameterSet& params, AdamConfig config) : config_(config) {
  for (const auto& [name, t] : params.items()) {
    params_.push_back(t);
    m_.emplace_back(t.size(), 0.0);
    v_.emplace_back(t.size(), 0.0);
  }
}

double Adam::step(double lr, double grad_scale) {
  double norm2 = 0.0;
  for (const Tensor& p : params_) {
    for (double g : p.grad()) norm2 += g * g * grad_scale * grad_scale;
  }
  const double norm = std::sqrt(norm2);
  double factor = grad_scale;
  if (config_.clip_norm > 0.0 && norm > config_.clip_norm) factor *= config_.clip_norm / norm;
  ++t_;
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  for (std::size_t p = 0; p < params_.size(); ++p) {
    Tensor t = params_[p];
    auto values = t.mutable_values();
    auto grads = t.grad();
    auto& m = m_[p];
    auto& v = v_[p];
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double g = grads[i] * factor;
      m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g;
      v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g * g;
      values[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + config_.eps);
    }
  }
  return norm;
}

void Adam::restore(std::size_t steps, std::vector<std::vector<double>> m, std::vector<std::vector<double>> v) {
  if (m.size() != params_.size() || v.size() != params_.size()) throw ShapeMismatch("optimizer state size differs");
  for (std::size_t p = 0; p < params_.size(); ++p) {
    if (m[p].size() != params_[p].size() || v[p].size() != params_[p].size())
      throw ShapeMismatch("optimizer state shape differs");
  }
  t_ = steps;
  m_ = std::move(m);
  v_ = std::move(v);
}

double warmup_rate(double base, std::size_t step, std::size_t warmup_steps) {
  if (warmup_steps == 0 || step >= warmup_steps) return base;
  return base * static_cast<double>(step + 1) / static_cast<double>(warmup_steps);
}

}  // namespace hopqg::nn
