#include "core/trainer.hpp"

#include <algorithm>
#include <cmath>

namespace adast {

namespace {
constexpr uint64_t kSourceStream = 0x501;
constexpr uint64_t kTargetStream = 0x7a6;
}  // namespace

Trainer::Trainer(TrainerOptions options, const DomainDataset& source, const DomainDataset& target)
    : options_(std::move(options)),
      source_(source),
      target_(adaptation_view(target)),
      model_([&] {
        ModelConfig arch = options_.arch;
        arch.use_attention = options_.toggles.use_attention;
        arch.use_dual_classifiers = options_.toggles.use_dual_classifiers;
        return AdastModel(arch, options_.seed);
      }()) {
  require(!source_.subject_split.empty(), ErrorKind::InvalidArgument,
          "source dataset needs a split assignment");
  for (size_t i : source_.split_indices(SplitId::Train)) {
    require(source_.records[i].stage != kUnlabeled, ErrorKind::Label,
            "source train split must be fully labeled");
  }
  opt_disc_ = std::make_unique<AdamOptimizer>(model_.parameter_group(ParamGroup::Discriminator),
                                              options_.adam);
  const auto main_group = options_.mode == TrainMode::SourceOnly ? ParamGroup::SourcePath
                                                                 : ParamGroup::Generator;
  opt_main_ = std::make_unique<AdamOptimizer>(model_.parameter_group(main_group), options_.adam);
  eval_route_ = options_.mode == TrainMode::SourceOnly ? DomainRole::Source : DomainRole::Target;
  pseudo_.assign(target_.records.size(), kUnlabeled);
}

double Trainer::discriminator_substep(const Batch& src, const Batch& trg) {
  Tensor src_feat, trg_feat;
  {
    NoGradGuard ng;  // features are constants for the discriminator update
    src_feat = model_.features(src.signals, DomainRole::Source, Phase::Train);
    trg_feat = model_.features(trg.signals, DomainRole::Target, Phase::Train);
  }
  opt_disc_->zero_grad();
  Tape tape;
  Tensor l_d = discriminator_loss(model_.discriminate(src_feat), model_.discriminate(trg_feat));
  tape.backward(l_d);
  opt_disc_->step();
  return l_d.item();
}

LossReport Trainer::generator_substep(const Batch& src, const Batch& trg, bool use_target_term) {
  opt_main_->zero_grad();
  LossReport report;
  Tape tape;
  auto src_out = model_.forward(src.signals, DomainRole::Source, Phase::Train);
  auto trg_out = model_.forward(trg.signals, DomainRole::Target, Phase::Train);
  Tensor l_adv = adversarial_loss(model_.discriminate(src_out.features),
                                  model_.discriminate(trg_out.features));
  Tensor l_cls_s = source_cls_loss(src_out.probs, src.labels);

  std::optional<Tensor> l_cls_t;
  if (use_target_term) {
    std::vector<int> labels(trg.indices.size());
    for (size_t i = 0; i < trg.indices.size(); ++i) {
      labels[i] = pseudo_[trg.indices[i]];
      require(labels[i] != kUnlabeled, ErrorKind::Label,
              "pseudo label missing for target record ", trg.indices[i]);
    }
    l_cls_t = target_cls_loss(trg_out.probs, labels);
  }

  std::optional<Tensor> reg;
  if (options_.toggles.use_dual_classifiers) {
    auto [th1, th2] = model_.classifier_param_vectors();
    reg = classifier_regularizer(th1, th2);
  }

  Tensor total = overall_loss(l_adv, l_cls_s, l_cls_t ? &*l_cls_t : nullptr,
                              reg ? &*reg : nullptr, options_.weights);
  tape.backward(total);
  opt_main_->step();

  report.l_adv = l_adv.item();
  report.l_cls_s = l_cls_s.item();
  report.l_cls_t = l_cls_t ? l_cls_t->item() : 0.0;
  report.reg = reg ? reg->item() : 0.0;
  report.l_overall = total.item();
  return report;
}

LossReport Trainer::train_step(const Batch& src, const Batch& trg, bool use_target_term) {
  try {
    LossReport report;
    report.l_d = discriminator_substep(src, trg);
    auto rest = generator_substep(src, trg, use_target_term);
    rest.l_d = report.l_d;
    ++step_index_;
    return rest;
  } catch (const AdastError& e) {
    if (e.kind() == ErrorKind::Numeric) {
      raise(ErrorKind::Numeric, e.what(), " (train step ", step_index_, ")");
    }
    throw;
  }
}

double Trainer::eval_discriminator_loss(const Batch& src, const Batch& trg) {
  NoGradGuard ng;
  Tensor src_feat = model_.features(src.signals, DomainRole::Source, Phase::Train);
  Tensor trg_feat = model_.features(trg.signals, DomainRole::Target, Phase::Train);
  return discriminator_loss(model_.discriminate(src_feat), model_.discriminate(trg_feat)).item();
}

LossReport Trainer::source_only_step(const Batch& src) {
  opt_main_->zero_grad();
  LossReport report;
  Tape tape;
  auto out = model_.forward(src.signals, DomainRole::Source, Phase::Train);
  Tensor l_cls_s = source_cls_loss(out.probs, src.labels);
  tape.backward(l_cls_s);
  opt_main_->step();
  ++step_index_;
  report.l_cls_s = l_cls_s.item();
  report.l_overall = report.l_cls_s;
  return report;
}

std::vector<int> Trainer::compute_pseudo_labels() {
  std::vector<int> labels(target_.records.size(), kUnlabeled);
  auto indices = target_.split_indices(SplitId::Train);
  NoGradGuard ng;
  const size_t chunk = 256;
  for (size_t start = 0; start < indices.size(); start += chunk) {
    const size_t end = std::min(indices.size(), start + chunk);
    std::vector<size_t> part(indices.begin() + static_cast<ptrdiff_t>(start),
                             indices.begin() + static_cast<ptrdiff_t>(end));
    auto batch = assemble_batch(target_, part);
    auto p_t = model_.forward(batch.signals, DomainRole::Target, Phase::Eval).probs;
    auto pl = pseudo_labels(p_t);
    for (size_t i = 0; i < part.size(); ++i) labels[part[i]] = pl[i];
  }
  return labels;
}

void Trainer::evaluate_epoch(int epoch, TrainResult& result) {
  auto val = evaluate(model_, target_, SplitId::Val, eval_route_);
  result.history.push_back(MetricsRow{epoch, "target_val", val.acc, val.mf1});
  if (options_.log != nullptr) {
    (*options_.log) << "epoch " << epoch << " target_val acc " << val.acc << " mf1 " << val.mf1
                    << "\n";
  }
  if (result.best_epoch < 0 || val.acc > result.best_val_acc) {
    result.best_val_acc = val.acc;
    result.best_epoch = epoch;
    best_snapshot_ = snapshot_params();
  }
  if (options_.on_epoch_end) options_.on_epoch_end(epoch);
}

void Trainer::run_epoch_adast(int epoch, bool use_target_term, TrainResult& result) {
  const double lr =
      lr_schedule(epoch, options_.adam.lr, options_.lr_decay_factor, options_.lr_decay_epoch);
  opt_disc_->set_lr(lr);
  opt_main_->set_lr(lr);
  auto src_plan = batch_plan(source_, SplitId::Train, options_.schedule.batch_size,
                             mix_seed(options_.seed, kSourceStream), epoch);
  auto trg_plan = batch_plan(target_, SplitId::Train, options_.schedule.batch_size,
                             mix_seed(options_.seed, kTargetStream), epoch);
  const size_t steps = std::max(src_plan.size(), trg_plan.size());
  for (size_t i = 0; i < steps; ++i) {
    auto src = assemble_batch(source_, src_plan[i % src_plan.size()]);
    auto trg = assemble_batch(target_, trg_plan[i % trg_plan.size()]);
    result.losses.push_back(train_step(src, trg, use_target_term));
  }
  evaluate_epoch(epoch, result);
}

void Trainer::run_epoch_source_only(int epoch, TrainResult& result) {
  opt_main_->set_lr(
      lr_schedule(epoch, options_.adam.lr, options_.lr_decay_factor, options_.lr_decay_epoch));
  auto src_plan = batch_plan(source_, SplitId::Train, options_.schedule.batch_size,
                             mix_seed(options_.seed, kSourceStream), epoch);
  for (const auto& indices : src_plan) {
    auto src = assemble_batch(source_, indices);
    result.losses.push_back(source_only_step(src));
  }
  evaluate_epoch(epoch, result);
}

TrainResult Trainer::run() {
  const auto& sched = options_.schedule;
  require(sched.pretrain_epochs >= 0 && sched.epochs_per_round >= 0 &&
              sched.self_train_rounds >= 0,
          ErrorKind::Config, "trainer: negative schedule entries");
  TrainResult result;
  int epoch = 0;

  if (options_.mode == TrainMode::SourceOnly) {
    const int total = sched.pretrain_epochs + sched.self_train_rounds * sched.epochs_per_round;
    for (int i = 0; i < total; ++i) run_epoch_source_only(epoch++, result);
  } else if (!options_.toggles.use_self_training) {
    // same epoch budget, all of it in the stage-0 objective
    const int total = sched.pretrain_epochs + sched.self_train_rounds * sched.epochs_per_round;
    for (int i = 0; i < total; ++i) run_epoch_adast(epoch++, false, result);
  } else {
    for (int i = 0; i < sched.pretrain_epochs; ++i) run_epoch_adast(epoch++, false, result);
    for (int round = 0; round < sched.self_train_rounds; ++round) {
      pseudo_ = compute_pseudo_labels();
      for (int i = 0; i < sched.epochs_per_round; ++i) run_epoch_adast(epoch++, true, result);
    }
  }
  result.total_epochs = epoch;

  if (!best_snapshot_.empty()) restore_params(best_snapshot_);
  if (epoch > 0) {
    result.target_test = evaluate(model_, target_, SplitId::Test, eval_route_);
    result.history.push_back(
        MetricsRow{result.best_epoch, "target_test", result.target_test.acc, result.target_test.mf1});
    result.source_test = evaluate(model_, source_, SplitId::Test, DomainRole::Source);
    result.history.push_back(
        MetricsRow{result.best_epoch, "source_test", result.source_test.acc, result.source_test.mf1});
  }
  return result;
}

std::vector<double> Trainer::snapshot_params() {
  std::vector<double> out;
  for (const auto& p : model_.named_parameters()) {
    out.insert(out.end(), p.tensor.data().begin(), p.tensor.data().end());
  }
  return out;
}

void Trainer::restore_params(const std::vector<double>& snapshot) {
  size_t offset = 0;
  for (auto& p : model_.named_parameters()) {
    auto& data = p.tensor.mutable_data();
    std::copy(snapshot.begin() + static_cast<ptrdiff_t>(offset),
              snapshot.begin() + static_cast<ptrdiff_t>(offset + data.size()), data.begin());
    offset += data.size();
  }
}

}  // namespace adast
