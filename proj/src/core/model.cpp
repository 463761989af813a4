#include "core/model.hpp"

#include <algorithm>

namespace adast {

void ModelConfig::validate() const {
  const size_t n = conv_channels.size();
  require(n >= 1, ErrorKind::Config, "model: at least one conv block required");
  require(conv_kernels.size() == n && conv_strides.size() == n && conv_paddings.size() == n,
          ErrorKind::Config, "model: conv channel/kernel/stride/padding lists must have equal length");
  require(epoch_len >= 1, ErrorKind::Config, "model: epoch length must be positive");
  require(num_classes >= 2, ErrorKind::Config, "model: need at least two classes");
  require(pool_kernel >= 1 && pool_stride >= 1, ErrorKind::Config, "model: bad pool geometry");
  require(classifier_hidden >= 1 && discriminator_hidden >= 1, ErrorKind::Config,
          "model: head widths must be positive");
  require(attention_dim >= 0, ErrorKind::Config, "model: attention_dim must be >= 0");
  int64_t len = epoch_len;
  for (size_t i = 0; i < n; ++i) {
    require(conv_channels[i] >= 1 && conv_kernels[i] >= 1 && conv_strides[i] >= 1 &&
                conv_paddings[i] >= 0,
            ErrorKind::Config, "model: bad conv block ", i);
    len = conv1d_out_len(len, conv_kernels[i], conv_strides[i], conv_paddings[i]);
    require(len >= 1, ErrorKind::Config, "model: conv block ", i, " collapses length to ", len);
    require(len >= pool_kernel, ErrorKind::Config, "model: pool window exceeds length ", len,
            " after conv block ", i);
    len = (len - pool_kernel) / pool_stride + 1;
  }
}

int ModelConfig::feature_channels() const { return conv_channels.back(); }

int ModelConfig::feature_len() const {
  int64_t len = epoch_len;
  for (size_t i = 0; i < conv_channels.size(); ++i) {
    len = conv1d_out_len(len, conv_kernels[i], conv_strides[i], conv_paddings[i]);
    len = (len - pool_kernel) / pool_stride + 1;
  }
  return static_cast<int>(len);
}

int ModelConfig::resolved_attention_dim() const {
  if (attention_dim > 0) return attention_dim;
  return std::max(1, feature_channels() / 2);
}

namespace {

Rng module_rng(uint64_t seed, const char* name) { return Rng(mix_seed(seed, fnv1a64(name))); }

}  // namespace

AdastModel::AdastModel(ModelConfig config, uint64_t seed) : config_(std::move(config)) {
  config_.validate();
  int in_ch = 1;
  for (size_t i = 0; i < config_.conv_channels.size(); ++i) {
    const std::string name = "F.block" + std::to_string(i);
    Rng rng = module_rng(seed, name.c_str());
    ConvBlock block;
    block.conv = Conv1dLayer::init(in_ch, config_.conv_channels[i], config_.conv_kernels[i],
                                   config_.conv_strides[i], config_.conv_paddings[i], rng);
    block.bn = BatchNorm1dLayer::init(config_.conv_channels[i]);
    blocks_.push_back(std::move(block));
    in_ch = config_.conv_channels[i];
  }

  const int d = config_.feature_channels();
  const int d_attn = config_.resolved_attention_dim();
  {
    Rng rng = module_rng(seed, "A_s");
    attn_src_ = AttentionModule::init(d, d_attn, rng);
  }
  {
    Rng rng = module_rng(seed, "A_t");
    attn_trg_ = AttentionModule::init(d, d_attn, rng);
  }

  const int flat = d * config_.feature_len();
  {
    Rng rng = module_rng(seed, "D");
    disc_.fc1 = LinearLayer::init(flat, config_.discriminator_hidden, rng);
    disc_.fc2 = LinearLayer::init(config_.discriminator_hidden, 1, rng);
  }
  {
    Rng rng = module_rng(seed, "C1");
    cls1_.fc1 = LinearLayer::init(flat, config_.classifier_hidden, rng);
    cls1_.fc2 = LinearLayer::init(config_.classifier_hidden, config_.num_classes, rng);
  }
  {
    Rng rng = module_rng(seed, "C2");
    cls2_.fc1 = LinearLayer::init(flat, config_.classifier_hidden, rng);
    cls2_.fc2 = LinearLayer::init(config_.classifier_hidden, config_.num_classes, rng);
  }
}

Tensor AdastModel::extract(const Tensor& x, Phase phase) {
  require(x.rank() == 3 && x.dim(1) == 1, ErrorKind::Shape, "model input must be [Bx1xT], got ",
          shape_str(x.shape()));
  require(x.dim(2) == config_.epoch_len, ErrorKind::Shape, "model input length ", x.dim(2),
          " does not match configured epoch length ", config_.epoch_len);
  Tensor h = x;
  for (auto& block : blocks_) {
    h = conv1d_forward(block.conv, h);
    h = batchnorm1d(block.bn, h, phase);
    h = relu(h);
    h = maxpool1d(h, config_.pool_kernel, config_.pool_stride);
  }
  return h;
}

Tensor AdastModel::attend(const Tensor& feat, DomainRole role) {
  if (!config_.use_attention) return feat;
  return attention_forward(role == DomainRole::Source ? attn_src_ : attn_trg_, feat);
}

Tensor AdastModel::features(const Tensor& x, DomainRole role, Phase phase) {
  return attend(extract(x, phase), role);
}

Tensor AdastModel::head_probs(const Head& head, const Tensor& flat) const {
  Tensor h = relu(linear_forward(head.fc1, flat));
  return softmax(linear_forward(head.fc2, h), 1);
}

Tensor AdastModel::classify(const Tensor& features) const {
  const int64_t batch = features.dim(0);
  Tensor flat = reshape(features, {batch, features.dim(1) * features.dim(2)});
  Tensor p1 = head_probs(cls1_, flat);
  if (!config_.use_dual_classifiers) return p1;
  Tensor p2 = head_probs(cls2_, flat);
  return mul_scalar(add(p1, p2), 0.5);
}

AdastModel::ForwardOut AdastModel::forward(const Tensor& x, DomainRole role, Phase phase) {
  ForwardOut out;
  out.features = features(x, role, phase);
  out.probs = classify(out.features);
  return out;
}

AdastModel::ForwardOut AdastModel::forward_source(const Tensor& x, Phase phase) {
  return forward(x, DomainRole::Source, phase);
}

AdastModel::ForwardOut AdastModel::forward_target(const Tensor& x, Phase phase) {
  return forward(x, DomainRole::Target, phase);
}

Tensor AdastModel::discriminate(const Tensor& features) {
  require(features.rank() == 3, ErrorKind::Shape, "discriminate expects [Bxdxl], got ",
          shape_str(features.shape()));
  const int64_t d = config_.feature_channels(), l = config_.feature_len();
  require(features.dim(1) == d && features.dim(2) == l, ErrorKind::Shape,
          "discriminate: features ", shape_str(features.shape()), " vs expected [Bx", d, "x", l, "]");
  const int64_t batch = features.dim(0);
  Tensor flat = reshape(features, {batch, d * l});
  Tensor h = relu(linear_forward(disc_.fc1, flat));
  Tensor logit = linear_forward(disc_.fc2, h);  // [B × 1]
  return reshape(sigmoid(logit), {batch});
}

std::pair<Tensor, Tensor> AdastModel::classifier_param_vectors() const {
  auto flatten_head = [](const Head& head) {
    std::vector<Tensor> parts;
    parts.push_back(reshape(head.fc1.weight, {head.fc1.weight.numel()}));
    parts.push_back(reshape(head.fc2.weight, {head.fc2.weight.numel()}));
    return concat(parts, 0);
  };
  return {flatten_head(cls1_), flatten_head(cls2_)};
}

std::vector<NamedParam> AdastModel::named_parameters() {
  std::vector<NamedParam> out;
  auto add = [&out](std::string name, const Tensor& t, bool trainable, bool decay) {
    out.push_back(NamedParam{std::move(name), t, trainable, decay});
  };
  for (size_t i = 0; i < blocks_.size(); ++i) {
    const std::string p = "F.block" + std::to_string(i);
    add(p + ".conv.weight", blocks_[i].conv.weight, true, true);
    add(p + ".conv.bias", blocks_[i].conv.bias, true, false);
    add(p + ".bn.gamma", blocks_[i].bn.gamma, true, false);
    add(p + ".bn.beta", blocks_[i].bn.beta, true, false);
    add(p + ".bn.running_mean", blocks_[i].bn.running_mean, false, false);
    add(p + ".bn.running_var", blocks_[i].bn.running_var, false, false);
  }
  auto add_attention = [&add](const char* prefix, AttentionModule& m) {
    const std::string p(prefix);
    add(p + ".h1.weight", m.h1.weight, true, true);
    add(p + ".h1.bias", m.h1.bias, true, false);
    add(p + ".h2.weight", m.h2.weight, true, true);
    add(p + ".h2.bias", m.h2.bias, true, false);
  };
  add_attention("A_s", attn_src_);
  add_attention("A_t", attn_trg_);
  auto add_head = [&add](const char* prefix, Head& h) {
    const std::string p(prefix);
    add(p + ".fc1.weight", h.fc1.weight, true, true);
    add(p + ".fc1.bias", h.fc1.bias, true, false);
    add(p + ".fc2.weight", h.fc2.weight, true, true);
    add(p + ".fc2.bias", h.fc2.bias, true, false);
  };
  add_head("D", disc_);
  add_head("C1", cls1_);
  add_head("C2", cls2_);
  return out;
}

std::vector<ParamRef> AdastModel::parameter_group(ParamGroup group) {
  std::vector<ParamRef> out;
  auto want = [&](const std::string& name) {
    const bool is_disc = name.rfind("D.", 0) == 0;
    const bool is_attn_src = name.rfind("A_s.", 0) == 0;
    const bool is_attn_trg = name.rfind("A_t.", 0) == 0;
    const bool is_cls2 = name.rfind("C2.", 0) == 0;
    switch (group) {
      case ParamGroup::Discriminator:
        return is_disc;
      case ParamGroup::Generator:
        if (is_disc) return false;
        if ((is_attn_src || is_attn_trg) && !config_.use_attention) return false;
        if (is_cls2 && !config_.use_dual_classifiers) return false;
        return true;
      case ParamGroup::SourcePath:
        if (is_disc || is_attn_trg) return false;
        if (is_attn_src && !config_.use_attention) return false;
        return true;
    }
    return false;
  };
  for (auto& p : named_parameters()) {
    if (p.trainable && want(p.name)) {
      out.push_back(ParamRef{p.name, p.tensor, p.weight_decay});
    }
  }
  return out;
}

}  // namespace adast
