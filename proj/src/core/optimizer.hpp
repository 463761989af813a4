#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/model.hpp"

namespace adast {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.5;
  double beta2 = 0.99;
  double eps = 1e-8;
  double weight_decay = 3e-4;
  // false: decoupled (lr-scaled additive term); true: classic L2-in-gradient.
  bool coupled_decay = false;
};

// lr decays once by `factor` at epoch `boundary` and stays there.
double lr_schedule(int epoch, double base_lr = 1e-3, double factor = 0.1, int boundary = 10);

// Adam over an explicit parameter set. Parameters flagged weight_decay=false
// (biases, batch-norm affine) are never decayed.
class AdamOptimizer {
 public:
  AdamOptimizer(std::vector<ParamRef> params, AdamConfig config);

  void step();
  void zero_grad();
  void set_lr(double lr) { config_.lr = lr; }
  double lr() const { return config_.lr; }
  int64_t step_count() const { return t_; }
  const std::vector<ParamRef>& params() const { return params_; }

 private:
  std::vector<ParamRef> params_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  AdamConfig config_;
  int64_t t_ = 0;
};

}  // namespace adast
