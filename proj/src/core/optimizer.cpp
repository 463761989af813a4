#include "core/optimizer.hpp"

#include <cmath>

namespace adast {

double lr_schedule(int epoch, double base_lr, double factor, int boundary) {
  require(epoch >= 0, ErrorKind::InvalidArgument, "lr_schedule: negative epoch");
  return epoch < boundary ? base_lr : base_lr * factor;
}

AdamOptimizer::AdamOptimizer(std::vector<ParamRef> params, AdamConfig config)
    : params_(std::move(params)), config_(config) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const auto& p : params_) {
    m_.emplace_back(p.tensor.data().size(), 0.0);
    v_.emplace_back(p.tensor.data().size(), 0.0);
  }
}

void AdamOptimizer::step() {
  ++t_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double bias1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double bias2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (size_t pi = 0; pi < params_.size(); ++pi) {
    auto& p = params_[pi];
    require(p.tensor.has_grad(), ErrorKind::InvalidArgument, "adam: parameter '", p.name,
            "' has no gradient");
    const auto& g = p.tensor.grad();
    auto& values = p.tensor.mutable_data();
    auto& m = m_[pi];
    auto& v = v_[pi];
    const double wd = p.weight_decay ? config_.weight_decay : 0.0;
    for (size_t i = 0; i < values.size(); ++i) {
      double gi = g[i];
      if (!std::isfinite(gi)) {
        raise(ErrorKind::Numeric, "adam: non-finite gradient in parameter '", p.name,
              "' at element ", i);
      }
      if (config_.coupled_decay) gi += wd * values[i];
      m[i] = b1 * m[i] + (1.0 - b1) * gi;
      v[i] = b2 * v[i] + (1.0 - b2) * gi * gi;
      const double mhat = m[i] / bias1;
      const double vhat = v[i] / bias2;
      double update = mhat / (std::sqrt(vhat) + config_.eps);
      if (!config_.coupled_decay) update += wd * values[i];
      values[i] -= config_.lr * update;
    }
  }
}

void AdamOptimizer::zero_grad() {
  for (auto& p : params_) p.tensor.zero_grad();
}

}  // namespace adast
