#include "core/layers.hpp"

#include <algorithm>
#include <cmath>

namespace adast {

namespace {

Tensor uniform_param(Shape shape, double bound, Rng& rng) {
  std::vector<double> v(static_cast<size_t>(shape_numel(shape)));
  for (auto& x : v) x = rng.uniform(-bound, bound);
  return Tensor::from_data(std::move(shape), std::move(v)).set_requires_grad(true);
}

}  // namespace

Conv1dLayer Conv1dLayer::init(int c_in, int c_out, int k, int stride, int padding, Rng& rng) {
  require(c_in > 0 && c_out > 0 && k > 0, ErrorKind::InvalidArgument, "conv1d: bad channel/kernel sizes");
  require(stride >= 1, ErrorKind::InvalidArgument, "conv1d: stride must be >= 1");
  require(padding >= 0, ErrorKind::InvalidArgument, "conv1d: padding must be >= 0");
  const double bound = 1.0 / std::sqrt(static_cast<double>(c_in * k));
  Conv1dLayer layer;
  layer.weight = uniform_param({c_out, c_in, k}, bound, rng);
  layer.bias = uniform_param({c_out}, bound, rng);
  layer.stride = stride;
  layer.padding = padding;
  return layer;
}

int64_t conv1d_out_len(int64_t l_in, int k, int stride, int padding) {
  return (l_in + 2 * static_cast<int64_t>(padding) - k) / stride + 1;
}

Tensor conv1d_forward(const Conv1dLayer& layer, const Tensor& x) {
  require(x.rank() == 3, ErrorKind::Shape, "conv1d expects [BxCxL], got ", shape_str(x.shape()));
  const int64_t batch = x.dim(0), c_in = x.dim(1), l_in = x.dim(2);
  require(c_in == layer.in_channels(), ErrorKind::Shape, "conv1d: input has ", c_in,
          " channels, layer expects ", layer.in_channels());
  const int k = layer.kernel();
  const int stride = layer.stride;
  const int pad = layer.padding;
  const int64_t l_out = conv1d_out_len(l_in, k, stride, pad);
  if (l_out < 1) {
    raise(ErrorKind::Geometry, "conv1d: output length ", l_out, " < 1 for L=", l_in, ", k=", k,
          ", stride=", stride, ", padding=", pad);
  }
  const int64_t c_out = layer.out_channels();

  const auto& xv = x.data();
  const auto& wv = layer.weight.data();
  const auto& bv = layer.bias.data();
  std::vector<double> out(static_cast<size_t>(batch * c_out * l_out));

  for (int64_t b = 0; b < batch; ++b) {
    const double* xb = xv.data() + b * c_in * l_in;
    double* ob = out.data() + b * c_out * l_out;
    for (int64_t co = 0; co < c_out; ++co) {
      const double* wc = wv.data() + co * c_in * k;
      for (int64_t lo = 0; lo < l_out; ++lo) {
        const int64_t start = lo * stride - pad;
        const int64_t k_lo = std::max<int64_t>(0, -start);
        const int64_t k_hi = std::min<int64_t>(k, l_in - start);
        double acc = bv[static_cast<size_t>(co)];
        for (int64_t ci = 0; ci < c_in; ++ci) {
          const double* xrow = xb + ci * l_in + start;
          const double* wrow = wc + ci * k;
          for (int64_t kk = k_lo; kk < k_hi; ++kk) acc += wrow[kk] * xrow[kk];
        }
        ob[co * l_out + lo] = acc;
      }
    }
  }

  const Tensor& w = layer.weight;
  const Tensor& bias = layer.bias;
  bool rec = grad_recording_enabled() &&
             (x.requires_grad() || w.requires_grad() || bias.requires_grad());
  Tensor result = Tensor::from_data({batch, c_out, l_out}, std::move(out));
  if (rec) {
    result.set_requires_grad(true);
    auto xn = x.node_ptr();
    auto wn = w.node_ptr();
    auto bn = bias.node_ptr();
    Tape::active()->record(result.node_ptr(), [xn, wn, bn, batch, c_in, c_out, l_in, l_out, k,
                                               stride, pad](const std::vector<double>& g, GradMap& grads) {
      auto& gx = grads.slot(xn.get());
      auto& gw = grads.slot(wn.get());
      auto& gb = grads.slot(bn.get());
      for (int64_t b = 0; b < batch; ++b) {
        const double* xb = xn->data.data() + b * c_in * l_in;
        double* gxb = gx.data() + b * c_in * l_in;
        const double* grow = g.data() + b * c_out * l_out;
        for (int64_t co = 0; co < c_out; ++co) {
          const double* wc = wn->data.data() + co * c_in * k;
          double* gwc = gw.data() + co * c_in * k;
          for (int64_t lo = 0; lo < l_out; ++lo) {
            const double gv = grow[co * l_out + lo];
            if (gv == 0.0) continue;
            gb[static_cast<size_t>(co)] += gv;
            const int64_t start = lo * stride - pad;
            const int64_t k_lo = std::max<int64_t>(0, -start);
            const int64_t k_hi = std::min<int64_t>(k, l_in - start);
            for (int64_t ci = 0; ci < c_in; ++ci) {
              const double* xrow = xb + ci * l_in + start;
              double* gxrow = gxb + ci * l_in + start;
              const double* wrow = wc + ci * k;
              double* gwrow = gwc + ci * k;
              for (int64_t kk = k_lo; kk < k_hi; ++kk) {
                gwrow[kk] += gv * xrow[kk];
                gxrow[kk] += gv * wrow[kk];
              }
            }
          }
        }
      }
    });
  }
  return result;
}

Tensor maxpool1d(const Tensor& x, int k, int stride) {
  require(x.rank() == 3, ErrorKind::Shape, "maxpool1d expects [BxCxL], got ", shape_str(x.shape()));
  require(k >= 1 && stride >= 1, ErrorKind::InvalidArgument, "maxpool1d: bad window/stride");
  const int64_t batch = x.dim(0), ch = x.dim(1), l_in = x.dim(2);
  if (l_in < k) {
    raise(ErrorKind::Geometry, "maxpool1d: window ", k, " larger than input length ", l_in);
  }
  const int64_t l_out = (l_in - k) / stride + 1;
  const auto& xv = x.data();
  std::vector<double> out(static_cast<size_t>(batch * ch * l_out));
  std::vector<int64_t> argmax_idx(out.size());
  for (int64_t bc = 0; bc < batch * ch; ++bc) {
    const double* row = xv.data() + bc * l_in;
    for (int64_t lo = 0; lo < l_out; ++lo) {
      const int64_t start = lo * stride;
      int64_t best = start;
      double bestv = row[start];
      for (int64_t i = start + 1; i < start + k; ++i) {
        if (row[i] > bestv) {  // strict: ties keep the lowest index
          bestv = row[i];
          best = i;
        }
      }
      out[static_cast<size_t>(bc * l_out + lo)] = bestv;
      argmax_idx[static_cast<size_t>(bc * l_out + lo)] = best;
    }
  }
  bool rec = grad_recording_enabled() && x.requires_grad();
  Tensor result = Tensor::from_data({batch, ch, l_out}, std::move(out));
  if (rec) {
    result.set_requires_grad(true);
    auto xn = x.node_ptr();
    Tape::active()->record(result.node_ptr(), [xn, argmax_idx, l_in, l_out, batch, ch](
                                                  const std::vector<double>& g, GradMap& grads) {
      auto& gx = grads.slot(xn.get());
      for (int64_t bc = 0; bc < batch * ch; ++bc) {
        for (int64_t lo = 0; lo < l_out; ++lo) {
          const size_t oi = static_cast<size_t>(bc * l_out + lo);
          gx[static_cast<size_t>(bc * l_in + argmax_idx[oi])] += g[oi];
        }
      }
    });
  }
  return result;
}

BatchNorm1dLayer BatchNorm1dLayer::init(int channels) {
  require(channels > 0, ErrorKind::InvalidArgument, "batchnorm: channels must be positive");
  BatchNorm1dLayer layer;
  layer.gamma = Tensor::full({channels}, 1.0).set_requires_grad(true);
  layer.beta = Tensor::zeros({channels}).set_requires_grad(true);
  layer.running_mean = Tensor::zeros({channels});
  layer.running_var = Tensor::full({channels}, 1.0);
  return layer;
}

Tensor batchnorm1d(BatchNorm1dLayer& layer, const Tensor& x, Phase phase) {
  require(x.rank() == 3, ErrorKind::Shape, "batchnorm1d expects [BxCxL], got ", shape_str(x.shape()));
  const int64_t batch = x.dim(0), ch = x.dim(1), len = x.dim(2);
  require(ch == layer.channels(), ErrorKind::Shape, "batchnorm1d: ", ch, " channels vs layer ",
          layer.channels());
  const int64_t n = batch * len;
  if (phase == Phase::Train && n < 2) {
    raise(ErrorKind::Statistics, "batchnorm1d train mode needs B*L >= 2 per channel, got ", n);
  }

  const auto& xv = x.data();
  const auto& gv = layer.gamma.data();
  const auto& bv = layer.beta.data();
  std::vector<double> mean_c(static_cast<size_t>(ch)), var_c(static_cast<size_t>(ch));

  if (phase == Phase::Train) {
    for (int64_t c = 0; c < ch; ++c) {
      double s = 0.0;
      for (int64_t b = 0; b < batch; ++b) {
        const double* row = xv.data() + (b * ch + c) * len;
        for (int64_t i = 0; i < len; ++i) s += row[i];
      }
      const double m = s / static_cast<double>(n);
      double v = 0.0;
      for (int64_t b = 0; b < batch; ++b) {
        const double* row = xv.data() + (b * ch + c) * len;
        for (int64_t i = 0; i < len; ++i) v += (row[i] - m) * (row[i] - m);
      }
      v /= static_cast<double>(n);  // biased
      mean_c[static_cast<size_t>(c)] = m;
      var_c[static_cast<size_t>(c)] = v;
    }
    auto& rm = layer.running_mean.mutable_data();
    auto& rv = layer.running_var.mutable_data();
    for (int64_t c = 0; c < ch; ++c) {
      rm[static_cast<size_t>(c)] = (1.0 - layer.momentum) * rm[static_cast<size_t>(c)] +
                                   layer.momentum * mean_c[static_cast<size_t>(c)];
      rv[static_cast<size_t>(c)] = (1.0 - layer.momentum) * rv[static_cast<size_t>(c)] +
                                   layer.momentum * var_c[static_cast<size_t>(c)];
    }
  } else {
    mean_c.assign(layer.running_mean.data().begin(), layer.running_mean.data().end());
    var_c.assign(layer.running_var.data().begin(), layer.running_var.data().end());
  }

  const double eps = layer.eps;
  std::vector<double> xhat(xv.size());
  std::vector<double> out(xv.size());
  for (int64_t b = 0; b < batch; ++b) {
    for (int64_t c = 0; c < ch; ++c) {
      const double m = mean_c[static_cast<size_t>(c)];
      const double inv = 1.0 / std::sqrt(var_c[static_cast<size_t>(c)] + eps);
      const double gamma = gv[static_cast<size_t>(c)];
      const double beta = bv[static_cast<size_t>(c)];
      const double* row = xv.data() + (b * ch + c) * len;
      double* hrow = xhat.data() + (b * ch + c) * len;
      double* orow = out.data() + (b * ch + c) * len;
      for (int64_t i = 0; i < len; ++i) {
        hrow[i] = (row[i] - m) * inv;
        orow[i] = gamma * hrow[i] + beta;
      }
    }
  }

  bool rec = grad_recording_enabled() && (x.requires_grad() || layer.gamma.requires_grad() ||
                                          layer.beta.requires_grad());
  Tensor result = Tensor::from_data(x.shape(), std::move(out));
  if (rec) {
    result.set_requires_grad(true);
    auto xn = x.node_ptr();
    auto gn = layer.gamma.node_ptr();
    auto bn = layer.beta.node_ptr();
    const bool train = phase == Phase::Train;
    Tape::active()->record(result.node_ptr(), [xn, gn, bn, xhat = std::move(xhat), var_c, eps,
                                               batch, ch, len, n, train](
                                                  const std::vector<double>& g, GradMap& grads) {
      auto& gx = grads.slot(xn.get());
      auto& gg = grads.slot(gn.get());
      auto& gb = grads.slot(bn.get());
      for (int64_t c = 0; c < ch; ++c) {
        double sum_g = 0.0, sum_gh = 0.0;
        for (int64_t b = 0; b < batch; ++b) {
          const int64_t base = (b * ch + c) * len;
          for (int64_t i = 0; i < len; ++i) {
            sum_g += g[static_cast<size_t>(base + i)];
            sum_gh += g[static_cast<size_t>(base + i)] * xhat[static_cast<size_t>(base + i)];
          }
        }
        gg[static_cast<size_t>(c)] += sum_gh;
        gb[static_cast<size_t>(c)] += sum_g;
        const double gamma = gn->data[static_cast<size_t>(c)];
        const double inv = 1.0 / std::sqrt(var_c[static_cast<size_t>(c)] + eps);
        if (train) {
          const double mg = sum_g / static_cast<double>(n);
          const double mgh = sum_gh / static_cast<double>(n);
          for (int64_t b = 0; b < batch; ++b) {
            const int64_t base = (b * ch + c) * len;
            for (int64_t i = 0; i < len; ++i) {
              const size_t idx = static_cast<size_t>(base + i);
              gx[idx] += gamma * inv * (g[idx] - mg - xhat[idx] * mgh);
            }
          }
        } else {
          for (int64_t b = 0; b < batch; ++b) {
            const int64_t base = (b * ch + c) * len;
            for (int64_t i = 0; i < len; ++i) {
              const size_t idx = static_cast<size_t>(base + i);
              gx[idx] += gamma * inv * g[idx];
            }
          }
        }
      }
    });
  }
  return result;
}

LinearLayer LinearLayer::init(int in, int out, Rng& rng) {
  require(in > 0 && out > 0, ErrorKind::InvalidArgument, "linear: bad feature sizes");
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  LinearLayer layer;
  layer.weight = uniform_param({out, in}, bound, rng);
  layer.bias = uniform_param({out}, bound, rng);
  return layer;
}

Tensor linear_forward(const LinearLayer& layer, const Tensor& x) {
  require(x.rank() == 2, ErrorKind::Shape, "linear expects [Bxin], got ", shape_str(x.shape()));
  const int64_t batch = x.dim(0), in = x.dim(1), out_f = layer.out_features();
  require(in == layer.in_features(), ErrorKind::Shape, "linear: input width ", in,
          " vs layer ", layer.in_features());

  const auto& xv = x.data();
  const auto& wv = layer.weight.data();
  const auto& bv = layer.bias.data();
  std::vector<double> out(static_cast<size_t>(batch * out_f));
  for (int64_t b = 0; b < batch; ++b) {
    const double* xrow = xv.data() + b * in;
    double* orow = out.data() + b * out_f;
    for (int64_t o = 0; o < out_f; ++o) {
      const double* wrow = wv.data() + o * in;
      double acc = bv[static_cast<size_t>(o)];
      for (int64_t i = 0; i < in; ++i) acc += xrow[i] * wrow[i];
      orow[o] = acc;
    }
  }

  bool rec = grad_recording_enabled() && (x.requires_grad() || layer.weight.requires_grad() ||
                                          layer.bias.requires_grad());
  Tensor result = Tensor::from_data({batch, out_f}, std::move(out));
  if (rec) {
    result.set_requires_grad(true);
    auto xn = x.node_ptr();
    auto wn = layer.weight.node_ptr();
    auto bn = layer.bias.node_ptr();
    Tape::active()->record(result.node_ptr(), [xn, wn, bn, batch, in, out_f](
                                                  const std::vector<double>& g, GradMap& grads) {
      auto& gx = grads.slot(xn.get());
      auto& gw = grads.slot(wn.get());
      auto& gb = grads.slot(bn.get());
      for (int64_t b = 0; b < batch; ++b) {
        const double* grow = g.data() + b * out_f;
        const double* xrow = xn->data.data() + b * in;
        double* gxrow = gx.data() + b * in;
        for (int64_t o = 0; o < out_f; ++o) {
          const double gv = grow[o];
          if (gv == 0.0) continue;
          gb[static_cast<size_t>(o)] += gv;
          const double* wrow = wn->data.data() + o * in;
          double* gwrow = gw.data() + o * in;
          for (int64_t i = 0; i < in; ++i) {
            gwrow[i] += gv * xrow[i];
            gxrow[i] += gv * wrow[i];
          }
        }
      }
    });
  }
  return result;
}

AttentionModule AttentionModule::init(int d, int d_attn, Rng& rng) {
  AttentionModule module;
  module.h1 = Conv1dLayer::init(d, d_attn, 1, 1, 0, rng);
  module.h2 = Conv1dLayer::init(d, d_attn, 1, 1, 0, rng);
  return module;
}

Tensor attention_weights(const AttentionModule& module, const Tensor& feat) {
  require(feat.rank() == 3, ErrorKind::Shape, "attention expects [Bxdxl], got ",
          shape_str(feat.shape()));
  Tensor z1 = conv1d_forward(module.h1, feat);  // [B × d_attn × l]
  Tensor z2 = conv1d_forward(module.h2, feat);
  // scores[b][i][j] = z1_i · z2_j; normalize over i for each j
  Tensor scores = bmm(transpose(z1, 1, 2), z2);  // [B × l × l]
  return softmax(scores, 1);
}

Tensor attention_forward(const AttentionModule& module, const Tensor& feat) {
  Tensor weights = attention_weights(module, feat);
  return bmm(feat, weights);  // out[b][c][j] = sum_i feat[b][c][i] * weights[b][i][j]
}

}  // namespace adast
