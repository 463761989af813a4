#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/data.hpp"
#include "core/losses.hpp"
#include "core/model.hpp"
#include "core/optimizer.hpp"
#include "core/trainer.hpp"

namespace adast {

// The single source of run truth: every hyperparameter of every module,
// readable from a flat key=value file with dotted namespaces and
// overridable per key. Unknown keys are rejected.
struct ExperimentConfig {
  // data generation / ingestion
  uint64_t data_seed = 1;
  int data_subjects = 20;
  int data_epochs_per_subject = 200;
  int data_t = 300;
  std::vector<double> data_priors = {0.12, 0.10, 0.42, 0.20, 0.16};
  std::vector<double> data_band_lo = {0.4, 0.9, 1.4, 1.9, 2.4};
  std::vector<double> data_band_hi = {0.7, 1.2, 1.7, 2.2, 2.7};
  double data_amp_primary = 1.0;
  double data_amp_secondary = 0.5;
  double data_base_noise_sigma = 0.25;
  std::string data_source_path;  // empty: generate synthetically
  std::string data_target_path;

  // target-domain shift
  double shift_amplitude_scale = 1.5;
  double shift_frequency_offset_hz = 0.2;
  double shift_extra_noise_sigma = 0.45;
  double shift_resample_factor = 0.75;

  // subject-wise split
  double split_train_frac = 0.6;
  double split_val_frac = 0.2;
  double split_test_frac = 0.2;
  uint64_t split_seed = 7;

  // architecture
  std::vector<int> arch_conv_channels = {8, 16, 32};
  std::vector<int> arch_conv_kernels = {25, 8, 8};
  std::vector<int> arch_conv_strides = {3, 1, 1};
  std::vector<int> arch_conv_paddings = {0, 0, 0};
  int arch_pool_kernel = 2;
  int arch_pool_stride = 2;
  int arch_attention_dim = 0;
  int arch_classifier_hidden = 64;
  int arch_discriminator_hidden = 64;

  // objective
  double loss_lambda1 = 0.01;
  double loss_lambda2 = 0.001;

  // optimizer
  double optim_lr = 1e-3;
  double optim_beta1 = 0.5;
  double optim_beta2 = 0.99;
  double optim_eps = 1e-8;
  double optim_weight_decay = 3e-4;
  bool optim_coupled_decay = false;
  double optim_lr_decay_factor = 0.1;
  int optim_lr_decay_epoch = 10;

  // schedule
  int train_pretrain_epochs = 15;
  int train_epochs_per_round = 10;
  int train_self_train_rounds = 2;
  int train_batch_size = 32;
  std::vector<uint64_t> train_seeds = {1, 2, 3, 4, 5};
  std::string train_mode = "adast";  // adast | source-only
  int train_parallel_seeds = 1;

  // ablation toggles
  bool ablate_attention = true;
  bool ablate_dual_classifiers = true;
  bool ablate_self_training = true;

  // sensitivity sweeps
  std::vector<double> sweep_lambda1_grid = {1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0};
  std::vector<double> sweep_lambda2_grid = {1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0};
};

// Key access. Throws a config error for unknown keys or unparsable values.
void config_set(ExperimentConfig& cfg, const std::string& key, const std::string& value);
std::string config_get(const ExperimentConfig& cfg, const std::string& key);
std::vector<std::string> config_keys();

// Defaults merged with the file's assignments.
ExperimentConfig load_config_file(const std::string& path);
void apply_config_text(ExperimentConfig& cfg, const std::string& text, const std::string& origin);
std::string serialize_config(const ExperimentConfig& cfg);

// Every problem found, empty when the config is runnable.
std::vector<std::string> validate_config(const ExperimentConfig& cfg);
// Raises a config error listing all problems.
void require_valid(const ExperimentConfig& cfg);

SyntheticShiftSpec to_shift_spec(const ExperimentConfig& cfg);
ModelConfig to_model_config(const ExperimentConfig& cfg, int epoch_len, int num_classes);
TrainSchedule to_schedule(const ExperimentConfig& cfg);
AblationToggles to_toggles(const ExperimentConfig& cfg);
LossWeights to_loss_weights(const ExperimentConfig& cfg);
AdamConfig to_adam_config(const ExperimentConfig& cfg);

}  // namespace adast
