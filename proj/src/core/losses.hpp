#pragma once

#include <optional>
#include <string>
#include <vector>

#include "core/tensor.hpp"

namespace adast {

struct LossWeights {
  double lambda1 = 0.01;   // target-classification weight
  double lambda2 = 0.001;  // classifier-diversity weight
};

// Per-step scalar components; l_overall = l_adv + l_cls_s + λ1·l_cls_t + λ2·reg.
// l_d drives the separate discriminator step and is reported alongside.
struct LossReport {
  double l_d = 0.0;
  double l_adv = 0.0;
  double l_cls_s = 0.0;
  double l_cls_t = 0.0;
  double reg = 0.0;
  double l_overall = 0.0;
};

std::string loss_csv_header();
std::string loss_csv_row(int64_t step, const LossReport& r);

// -mean(log d_src) - mean(log(1 - d_trg)): discriminator trained to flag
// source as 1, target as 0. Inputs must lie in (0,1).
Tensor discriminator_loss(const Tensor& d_src, const Tensor& d_trg);

// Inverted labels: -mean(log(1 - d_src)) - mean(log d_trg). Steps only the
// extractor/attention group; the discriminator's optimizer never sees it.
Tensor adversarial_loss(const Tensor& d_src, const Tensor& d_trg);

// Row argmax of the averaged prediction; ties break to the lowest class.
// Plain integers: constants, nothing flows back through label generation.
std::vector<int> pseudo_labels(const Tensor& p_t);

Tensor target_cls_loss(const Tensor& p_t, const std::vector<int>& pseudo);
Tensor source_cls_loss(const Tensor& p_s, const std::vector<int>& labels);

// |theta1 · theta2| over equal-length flat vectors; subgradient 0 at 0.
Tensor classifier_regularizer(const Tensor& theta1, const Tensor& theta2);

// Eq-10 combination. Null target/regularizer terms are treated as disabled
// (self-training phase off, single classifier).
Tensor overall_loss(const Tensor& l_adv, const Tensor& l_cls_s, const Tensor* l_cls_t,
                    const Tensor* reg, const LossWeights& w);

}  // namespace adast
