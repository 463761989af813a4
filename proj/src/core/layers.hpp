#pragma once

#include "core/rng.hpp"
#include "core/tensor.hpp"

namespace adast {

enum class Phase { Train, Eval };

// Weights initialized uniform in ±1/sqrt(fan_in).
struct Conv1dLayer {
  Tensor weight;  // [C_out × C_in × k]
  Tensor bias;    // [C_out]
  int stride = 1;
  int padding = 0;

  static Conv1dLayer init(int c_in, int c_out, int k, int stride, int padding, Rng& rng);
  int kernel() const { return static_cast<int>(weight.dim(2)); }
  int in_channels() const { return static_cast<int>(weight.dim(1)); }
  int out_channels() const { return static_cast<int>(weight.dim(0)); }
};

int64_t conv1d_out_len(int64_t l_in, int k, int stride, int padding);

// Sliding-window cross-correlation plus bias over [B × C_in × L].
Tensor conv1d_forward(const Conv1dLayer& layer, const Tensor& x);

// Window maxima; gradient routes to the first maximal index per window.
Tensor maxpool1d(const Tensor& x, int k, int stride);

struct BatchNorm1dLayer {
  Tensor gamma;         // [C]
  Tensor beta;          // [C]
  Tensor running_mean;  // [C], buffer
  Tensor running_var;   // [C], buffer
  double eps = 1e-5;
  double momentum = 0.1;

  static BatchNorm1dLayer init(int channels);
  int channels() const { return static_cast<int>(gamma.dim(0)); }
};

// Train: batch statistics (biased variance) + running-stat EMA update.
// Eval: running statistics. x is [B × C × L].
Tensor batchnorm1d(BatchNorm1dLayer& layer, const Tensor& x, Phase phase);

struct LinearLayer {
  Tensor weight;  // [out × in]
  Tensor bias;    // [out]

  static LinearLayer init(int in, int out, Rng& rng);
  int in_features() const { return static_cast<int>(weight.dim(1)); }
  int out_features() const { return static_cast<int>(weight.dim(0)); }
};

// x[B × in] -> x · weight^T + bias
Tensor linear_forward(const LinearLayer& layer, const Tensor& x);

// Two 1x1 convolutions scoring pairwise positions; output is the
// score-weighted sum of input positions and keeps the input shape.
struct AttentionModule {
  Conv1dLayer h1;
  Conv1dLayer h2;

  static AttentionModule init(int d, int d_attn, Rng& rng);
};

// Normalized scores [B × l × l]; column j sums to 1 over the first index.
Tensor attention_weights(const AttentionModule& module, const Tensor& feat);

Tensor attention_forward(const AttentionModule& module, const Tensor& feat);

}  // namespace adast
