#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "core/data.hpp"
#include "core/losses.hpp"
#include "core/metrics.hpp"
#include "core/model.hpp"
#include "core/optimizer.hpp"

namespace adast {

struct TrainSchedule {
  int pretrain_epochs = 15;   // stage without the target-classification term
  int epochs_per_round = 10;
  int self_train_rounds = 2;  // r
  int batch_size = 32;
};

struct AblationToggles {
  bool use_attention = true;        // ATT
  bool use_dual_classifiers = true; // DC
  bool use_self_training = true;    // ST
};

enum class TrainMode { Adast, SourceOnly };

struct MetricsRow {
  int epoch;
  std::string split;
  double acc;
  double mf1;
};

struct TrainResult {
  std::vector<MetricsRow> history;
  std::vector<LossReport> losses;
  int best_epoch = -1;
  double best_val_acc = 0.0;
  EvalResult target_test;
  EvalResult source_test;
  int total_epochs = 0;
};

struct TrainerOptions {
  ModelConfig arch;  // attention/dual-classifier toggles are folded in here
  TrainSchedule schedule;
  AblationToggles toggles;
  LossWeights weights;
  AdamConfig adam;
  double lr_decay_factor = 0.1;
  int lr_decay_epoch = 10;
  TrainMode mode = TrainMode::Adast;
  uint64_t seed = 1;
  std::ostream* log = nullptr;
  std::function<void(int epoch)> on_epoch_end;  // test hook
};

// One training run over a source/target dataset pair. The target's train
// labels are replaced by the unlabeled sentinel on construction, so the
// adaptation path cannot read them; validation/test labels survive for
// held-out evaluation.
class Trainer {
 public:
  Trainer(TrainerOptions options, const DomainDataset& source, const DomainDataset& target);

  TrainResult run();

  AdastModel& model() { return model_; }
  AdamOptimizer& opt_discriminator() { return *opt_disc_; }
  AdamOptimizer& opt_main() { return *opt_main_; }
  const DomainDataset& target_view() const { return target_; }
  const std::vector<int>& current_pseudo_labels() const { return pseudo_; }

  // Sub-step (1): discriminator loss on current (detached) features, steps
  // the discriminator optimizer only. Returns l_d.
  double discriminator_substep(const Batch& src, const Batch& trg);

  // Sub-step (2): recomputes the forward pass, assembles the overall
  // objective, steps the extractor/attention/classifier optimizer only.
  LossReport generator_substep(const Batch& src, const Batch& trg, bool use_target_term);

  // Both sub-steps in order; use_target_term enables the pseudo-label loss.
  LossReport train_step(const Batch& src, const Batch& trg, bool use_target_term);

  // l_d evaluated without any update (train-phase statistics, no recording).
  double eval_discriminator_loss(const Batch& src, const Batch& trg);

  // Averaged eval-mode predictions over the full target train split; indexed
  // by record position, non-train records hold the sentinel.
  std::vector<int> compute_pseudo_labels();

 private:
  LossReport source_only_step(const Batch& src);
  void run_epoch_adast(int epoch, bool use_target_term, TrainResult& result);
  void run_epoch_source_only(int epoch, TrainResult& result);
  void evaluate_epoch(int epoch, TrainResult& result);
  std::vector<double> snapshot_params();
  void restore_params(const std::vector<double>& snapshot);

  TrainerOptions options_;
  DomainDataset source_;
  DomainDataset target_;
  AdastModel model_;
  std::unique_ptr<AdamOptimizer> opt_disc_;
  std::unique_ptr<AdamOptimizer> opt_main_;
  std::vector<int> pseudo_;
  std::vector<double> best_snapshot_;
  DomainRole eval_route_ = DomainRole::Target;
  int64_t step_index_ = 0;
};

}  // namespace adast
