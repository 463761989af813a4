#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "core/layers.hpp"
#include "core/types.hpp"

namespace adast {

struct ModelConfig {
  int epoch_len = 300;  // T
  int num_classes = 5;  // K
  std::vector<int> conv_channels = {8, 16, 32};
  std::vector<int> conv_kernels = {25, 8, 8};
  std::vector<int> conv_strides = {3, 1, 1};
  std::vector<int> conv_paddings = {0, 0, 0};
  int pool_kernel = 2;
  int pool_stride = 2;
  int attention_dim = 0;  // 0 -> half the feature channels, min 1
  int classifier_hidden = 64;
  int discriminator_hidden = 64;
  bool use_attention = true;
  bool use_dual_classifiers = true;

  // Throws on inconsistent sizes or a feature map that collapses below
  // length 1 anywhere in the conv/pool chain.
  void validate() const;
  int feature_channels() const;  // d
  int feature_len() const;       // l
  int resolved_attention_dim() const;
};

struct NamedParam {
  std::string name;
  Tensor tensor;
  bool trainable = true;     // false for batch-norm running statistics
  bool weight_decay = true;  // false for biases and batch-norm affine params
};

struct ParamRef {
  std::string name;
  Tensor tensor;
  bool weight_decay = true;
};

enum class ParamGroup {
  Discriminator,  // D only
  Generator,      // F, A_s, A_t, C1, C2 (honoring attention/dual toggles)
  SourcePath,     // F, A_s, C1, C2: the source-only baseline set
};

// The six networks: shared extractor F, unshared attentions A_s/A_t,
// discriminator D and the two classifiers C1/C2.
class AdastModel {
 public:
  AdastModel(ModelConfig config, uint64_t seed);

  struct ForwardOut {
    Tensor features;  // [B × d × l]
    Tensor probs;     // [B × K], averaged over the classifier pair
  };

  ForwardOut forward_source(const Tensor& x, Phase phase);
  ForwardOut forward_target(const Tensor& x, Phase phase);
  ForwardOut forward(const Tensor& x, DomainRole role, Phase phase);

  // A(F(x)) without the classifier heads.
  Tensor features(const Tensor& x, DomainRole role, Phase phase);

  Tensor discriminate(const Tensor& features);

  // Flat weight vectors of the two classifiers, identical layout, graph
  // recorded so the diversity regularizer backpropagates. Weights only.
  std::pair<Tensor, Tensor> classifier_param_vectors() const;

  std::vector<NamedParam> named_parameters();
  std::vector<ParamRef> parameter_group(ParamGroup group);

  const ModelConfig& config() const { return config_; }

 private:
  struct ConvBlock {
    Conv1dLayer conv;
    BatchNorm1dLayer bn;
  };
  struct Head {
    LinearLayer fc1;
    LinearLayer fc2;
  };

  Tensor extract(const Tensor& x, Phase phase);
  Tensor attend(const Tensor& feat, DomainRole role);
  Tensor head_probs(const Head& head, const Tensor& flat) const;
  Tensor classify(const Tensor& features) const;

  ModelConfig config_;
  std::vector<ConvBlock> blocks_;
  AttentionModule attn_src_;
  AttentionModule attn_trg_;
  Head disc_;
  Head cls1_;
  Head cls2_;
};

}  // namespace adast
