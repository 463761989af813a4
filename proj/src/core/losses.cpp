#include "core/losses.hpp"

#include <cmath>
#include <sstream>

namespace adast {

std::string loss_csv_header() { return "step,l_d,l_adv,l_cls_s,l_cls_t,reg,l_overall"; }

std::string loss_csv_row(int64_t step, const LossReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << step << ',' << r.l_d << ',' << r.l_adv << ',' << r.l_cls_s << ',' << r.l_cls_t << ','
     << r.reg << ',' << r.l_overall;
  return os.str();
}

namespace {

void check_unit_interval(const Tensor& d, const char* arg) {
  for (double v : d.data()) {
    if (!(v > 0.0 && v < 1.0)) {
      raise(ErrorKind::Numeric, "discriminator output ", arg, " = ", v,
            " outside (0,1); expected clamped sigmoid values");
    }
  }
}

Tensor one_minus(const Tensor& t) { return add_scalar(neg(t), 1.0); }

}  // namespace

Tensor discriminator_loss(const Tensor& d_src, const Tensor& d_trg) {
  check_unit_interval(d_src, "d_src");
  check_unit_interval(d_trg, "d_trg");
  return sub(neg(mean(log(d_src))), mean(log(one_minus(d_trg))));
}

Tensor adversarial_loss(const Tensor& d_src, const Tensor& d_trg) {
  check_unit_interval(d_src, "d_src");
  check_unit_interval(d_trg, "d_trg");
  return sub(neg(mean(log(one_minus(d_src)))), mean(log(d_trg)));
}

std::vector<int> pseudo_labels(const Tensor& p_t) {
  require(p_t.rank() == 2, ErrorKind::Shape, "pseudo_labels expects [BxK], got ",
          shape_str(p_t.shape()));
  auto idx = argmax(p_t, 1);
  std::vector<int> out(idx.size());
  for (size_t i = 0; i < idx.size(); ++i) out[i] = static_cast<int>(idx[i]);
  return out;
}

Tensor target_cls_loss(const Tensor& p_t, const std::vector<int>& pseudo) {
  return cross_entropy(p_t, pseudo);
}

Tensor source_cls_loss(const Tensor& p_s, const std::vector<int>& labels) {
  return cross_entropy(p_s, labels);
}

Tensor classifier_regularizer(const Tensor& theta1, const Tensor& theta2) {
  require(theta1.rank() == 1 && theta2.rank() == 1, ErrorKind::Shape,
          "classifier_regularizer expects flat vectors");
  require(theta1.numel() == theta2.numel(), ErrorKind::Shape, "classifier_regularizer: lengths ",
          theta1.numel(), " and ", theta2.numel(), " differ");
  return abs(sum(mul(theta1, theta2)));
}

Tensor overall_loss(const Tensor& l_adv, const Tensor& l_cls_s, const Tensor* l_cls_t,
                    const Tensor* reg, const LossWeights& w) {
  auto check_finite = [](const Tensor& t, const char* name) {
    require(std::isfinite(t.item()), ErrorKind::Numeric, "overall_loss: component ", name,
            " is not finite (", t.item(), ")");
  };
  check_finite(l_adv, "l_adv");
  check_finite(l_cls_s, "l_cls_s");
  Tensor total = add(l_adv, l_cls_s);
  if (l_cls_t != nullptr) {
    check_finite(*l_cls_t, "l_cls_t");
    total = add(total, mul_scalar(*l_cls_t, w.lambda1));
  }
  if (reg != nullptr) {
    check_finite(*reg, "regularizer");
    total = add(total, mul_scalar(*reg, w.lambda2));
  }
  return total;
}

}  // namespace adast
