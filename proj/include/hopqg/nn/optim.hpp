#pragma once

#include <cstddef>
#include <vector>

#include "hopqg/nn/layers.hpp"

namespace hopqg::nn {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double clip_norm = 0.0;  // global gradient-norm clip, 0 disables
};

class Adam {
 public:
  Adam(const ParameterSet& params, AdamConfig config = {});

  // Applies one update with learning rate lr using the accumulated gradients,
  // scaled by grad_scale first (e.g. 1/batch). Returns the pre-clip norm.
  double step(double lr, double grad_scale = 1.0);
  std::size_t steps() const { return t_; }

  const std::vector<std::vector<double>>& first_moments() const { return m_; }
  const std::vector<std::vector<double>>& second_moments() const { return v_; }
  void restore(std::size_t steps, std::vector<std::vector<double>> m, std::vector<std::vector<double>> v);

 private:
  std::vector<Tensor> params_;
  AdamConfig config_;
  std::size_t t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

// Linear warmup over the first warmup_steps, then constant.
double warmup_rate(double base, std::size_t step, std::size_t warmup_steps);

}  // namespace hopqg::nn
