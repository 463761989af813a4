#include "core/harness.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include "core/checkpoint.hpp"

namespace adast {

namespace fs = std::filesystem;

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  require(out.good(), ErrorKind::Io, "cannot open ", path, " for writing");
  out << content;
  out.close();
  require(out.good(), ErrorKind::Io, "failed writing ", path);
}

namespace {

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(!ec, ErrorKind::Io, "cannot create directory ", dir, ": ", ec.message());
}

std::string metrics_csv(const std::vector<MetricsRow>& history) {
  std::ostringstream os;
  os.precision(17);
  os << "epoch,split,acc,mf1\n";
  for (const auto& row : history) {
    os << row.epoch << ',' << row.split << ',' << row.acc << ',' << row.mf1 << "\n";
  }
  return os.str();
}

std::string losses_csv(const std::vector<LossReport>& losses) {
  std::string out = loss_csv_header() + "\n";
  for (size_t i = 0; i < losses.size(); ++i) {
    out += loss_csv_row(static_cast<int64_t>(i), losses[i]) + "\n";
  }
  return out;
}

void finalize_summary(RunSummary& summary) {
  const double n = static_cast<double>(summary.seeds.size());
  for (const auto& s : summary.seeds) {
    summary.acc_mean += s.target_acc;
    summary.mf1_mean += s.target_mf1;
  }
  summary.acc_mean /= n;
  summary.mf1_mean /= n;
  if (summary.seeds.size() > 1) {
    double va = 0.0, vm = 0.0;
    for (const auto& s : summary.seeds) {
      va += (s.target_acc - summary.acc_mean) * (s.target_acc - summary.acc_mean);
      vm += (s.target_mf1 - summary.mf1_mean) * (s.target_mf1 - summary.mf1_mean);
    }
    summary.acc_std = std::sqrt(va / (n - 1.0));
    summary.mf1_std = std::sqrt(vm / (n - 1.0));
  }
}

TrainerOptions trainer_options_from(const ExperimentConfig& cfg, int epoch_len, int num_classes,
                                    uint64_t seed) {
  TrainerOptions opts;
  opts.arch = to_model_config(cfg, epoch_len, num_classes);
  opts.schedule = to_schedule(cfg);
  opts.toggles = to_toggles(cfg);
  opts.weights = to_loss_weights(cfg);
  opts.adam = to_adam_config(cfg);
  opts.lr_decay_factor = cfg.optim_lr_decay_factor;
  opts.lr_decay_epoch = cfg.optim_lr_decay_epoch;
  opts.mode = cfg.train_mode == "source-only" ? TrainMode::SourceOnly : TrainMode::Adast;
  opts.seed = seed;
  return opts;
}

}  // namespace

DataPair prepare_datasets(const ExperimentConfig& cfg) {
  DataPair pair;
  if (!cfg.data_source_path.empty()) {
    pair.source = load_dataset(cfg.data_source_path);
  } else {
    pair.source = generate_synthetic(to_shift_spec(cfg), DomainRole::Source);
  }
  if (!cfg.data_target_path.empty()) {
    pair.target = load_dataset(cfg.data_target_path);
  } else {
    pair.target = generate_synthetic(to_shift_spec(cfg), DomainRole::Target);
  }
  require(pair.source.t == pair.target.t, ErrorKind::Compat, "source T=", pair.source.t,
          " and target T=", pair.target.t, " differ");
  require(pair.source.k == pair.target.k, ErrorKind::Compat, "source K=", pair.source.k,
          " and target K=", pair.target.k, " differ");
  split_subjects(pair.source, cfg.split_train_frac, cfg.split_val_frac, cfg.split_test_frac,
                 cfg.split_seed);
  split_subjects(pair.target, cfg.split_train_frac, cfg.split_val_frac, cfg.split_test_frac,
                 mix_seed(cfg.split_seed, 1));
  return pair;
}

RunSummary run_training(const ExperimentConfig& cfg, const std::string& out_dir) {
  require_valid(cfg);
  ensure_dir(out_dir);
  write_text_file(out_dir + "/config.txt", serialize_config(cfg));

  const DataPair data = prepare_datasets(cfg);

  RunSummary summary;
  summary.seeds.resize(cfg.train_seeds.size());

  auto run_seed = [&](size_t idx) {
    const uint64_t seed = cfg.train_seeds[idx];
    const std::string seed_dir = out_dir + "/seed_" + std::to_string(seed);
    ensure_dir(seed_dir);
    auto opts = trainer_options_from(cfg, data.source.t, data.source.k, seed);
    Trainer trainer(opts, data.source, data.target);
    TrainResult result = trainer.run();

    write_text_file(seed_dir + "/metrics.csv", metrics_csv(result.history));
    write_text_file(seed_dir + "/losses.csv", losses_csv(result.losses));
    save_checkpoint(trainer.model(), seed_dir + "/checkpoint.bin");
    write_text_file(seed_dir + "/eval_target_test.txt", format_report(result.target_test));
    write_text_file(seed_dir + "/eval_target_test.csv", report_csv(result.target_test));

    SeedResult sr;
    sr.seed = seed;
    sr.target_acc = result.target_test.acc;
    sr.target_mf1 = result.target_test.mf1;
    sr.source_acc = result.source_test.acc;
    sr.source_mf1 = result.source_test.mf1;
    sr.best_val_acc = result.best_val_acc;
    sr.best_epoch = result.best_epoch;
    summary.seeds[idx] = sr;
  };

  const size_t workers =
      std::min<size_t>(static_cast<size_t>(std::max(1, cfg.train_parallel_seeds)),
                       cfg.train_seeds.size());
  if (workers <= 1) {
    for (size_t i = 0; i < cfg.train_seeds.size(); ++i) run_seed(i);
  } else {
    for (size_t start = 0; start < cfg.train_seeds.size(); start += workers) {
      std::vector<std::thread> pool;
      const size_t end = std::min(cfg.train_seeds.size(), start + workers);
      for (size_t i = start; i < end; ++i) pool.emplace_back(run_seed, i);
      for (auto& t : pool) t.join();
    }
  }

  finalize_summary(summary);
  write_text_file(out_dir + "/summary.csv", summary_csv(summary));
  write_text_file(out_dir + "/summary.txt", summary_text(summary, cfg.train_mode));
  return summary;
}

std::string summary_csv(const RunSummary& summary) {
  std::ostringstream os;
  os.precision(17);
  os << "seed,target_acc,target_mf1,source_acc,source_mf1,best_val_acc,best_epoch\n";
  for (const auto& s : summary.seeds) {
    os << s.seed << ',' << s.target_acc << ',' << s.target_mf1 << ',' << s.source_acc << ','
       << s.source_mf1 << ',' << s.best_val_acc << ',' << s.best_epoch << "\n";
  }
  os << "mean," << summary.acc_mean << ',' << summary.mf1_mean << ",,,,\n";
  os << "std," << summary.acc_std << ',' << summary.mf1_std << ",,,,\n";
  return os.str();
}

std::string summary_text(const RunSummary& summary, const std::string& title) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << title << ": target acc " << 100.0 * summary.acc_mean << " +/- " << 100.0 * summary.acc_std
     << ", target mf1 " << 100.0 * summary.mf1_mean << " +/- " << 100.0 * summary.mf1_std
     << " (over " << summary.seeds.size() << " seeds)\n";
  return os.str();
}

std::vector<AblationRow> run_ablation(const ExperimentConfig& cfg, const std::string& out_dir) {
  require_valid(cfg);
  ensure_dir(out_dir);
  write_text_file(out_dir + "/config.txt", serialize_config(cfg));

  const std::vector<std::pair<std::string, AblationToggles>> variants = {
      {"base", {false, false, false}},
      {"att", {true, false, false}},
      {"att_dc", {true, true, false}},
      {"att_st", {true, false, true}},
      {"att_dc_st", {true, true, true}},
  };

  std::vector<AblationRow> rows;
  for (const auto& [name, toggles] : variants) {
    ExperimentConfig variant_cfg = cfg;
    variant_cfg.train_mode = "adast";
    variant_cfg.ablate_attention = toggles.use_attention;
    variant_cfg.ablate_dual_classifiers = toggles.use_dual_classifiers;
    variant_cfg.ablate_self_training = toggles.use_self_training;
    AblationRow row;
    row.variant = name;
    row.toggles = toggles;
    row.summary = run_training(variant_cfg, out_dir + "/variant_" + name);
    rows.push_back(std::move(row));
  }

  std::ostringstream os;
  os.precision(17);
  os << "variant,att,dc,st,acc_mean,acc_std,mf1_mean,mf1_std\n";
  for (const auto& row : rows) {
    os << row.variant << ',' << (row.toggles.use_attention ? 1 : 0) << ','
       << (row.toggles.use_dual_classifiers ? 1 : 0) << ','
       << (row.toggles.use_self_training ? 1 : 0) << ',' << row.summary.acc_mean << ','
       << row.summary.acc_std << ',' << row.summary.mf1_mean << ',' << row.summary.mf1_std
       << "\n";
  }
  write_text_file(out_dir + "/ablation.csv", os.str());
  return rows;
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, int which_lambda,
                                const std::string& out_dir) {
  require(which_lambda == 1 || which_lambda == 2, ErrorKind::InvalidArgument,
          "sweep selects lambda 1 or 2, got ", which_lambda);
  require_valid(cfg);
  ensure_dir(out_dir);
  write_text_file(out_dir + "/config.txt", serialize_config(cfg));

  const auto& grid = which_lambda == 1 ? cfg.sweep_lambda1_grid : cfg.sweep_lambda2_grid;
  std::vector<SweepRow> rows;
  for (double value : grid) {
    ExperimentConfig point_cfg = cfg;
    if (which_lambda == 1) {
      point_cfg.loss_lambda1 = value;
    } else {
      point_cfg.loss_lambda2 = value;
    }
    std::ostringstream dir;
    dir << out_dir << "/lambda" << which_lambda << "_" << value;
    SweepRow row;
    row.lambda = value;
    row.summary = run_training(point_cfg, dir.str());
    rows.push_back(std::move(row));
  }

  std::ostringstream os;
  os.precision(17);
  os << "lambda" << which_lambda << ",acc_mean,acc_std,mf1_mean,mf1_std\n";
  for (const auto& row : rows) {
    os << row.lambda << ',' << row.summary.acc_mean << ',' << row.summary.acc_std << ','
       << row.summary.mf1_mean << ',' << row.summary.mf1_std << "\n";
  }
  write_text_file(out_dir + "/sweep.csv", os.str());
  return rows;
}

namespace {

std::string dataset_summary(const DomainDataset& ds) {
  std::ostringstream os;
  os << ds.domain_name << ": n=" << ds.records.size() << " T=" << ds.t << " K=" << ds.k
     << " subjects=" << ds.subjects().size() << " histogram=[";
  auto hist = ds.class_histogram();
  for (size_t c = 0; c < hist.size(); ++c) {
    if (c) os << ",";
    os << hist[c];
  }
  os << "]\n";
  return os.str();
}

}  // namespace

std::string generate_data_files(const ExperimentConfig& cfg, const std::string& out_dir) {
  auto spec = to_shift_spec(cfg);
  spec.validate();
  ensure_dir(out_dir);
  write_text_file(out_dir + "/config.txt", serialize_config(cfg));
  auto source = generate_synthetic(spec, DomainRole::Source);
  auto target = generate_synthetic(spec, DomainRole::Target);
  save_dataset(source, out_dir + "/source.adst");
  save_dataset(target, out_dir + "/target.adst");
  std::string summary = dataset_summary(source) + dataset_summary(target);
  write_text_file(out_dir + "/summary.txt", summary);
  return summary;
}

namespace {

AdastModel model_for_checkpoint(const ExperimentConfig& cfg, const DomainDataset& ds,
                                const std::string& checkpoint_path) {
  ModelConfig arch = to_model_config(cfg, ds.t, ds.k);
  arch.validate();
  AdastModel model(arch, 0);
  load_checkpoint(model, checkpoint_path);
  return model;
}

}  // namespace

EvalResult evaluate_checkpoint_file(const ExperimentConfig& cfg, const std::string& checkpoint_path,
                                    const std::string& data_path, DomainRole route, SplitId split) {
  auto ds = load_dataset(data_path);
  split_subjects(ds, cfg.split_train_frac, cfg.split_val_frac, cfg.split_test_frac,
                 route == DomainRole::Source ? cfg.split_seed : mix_seed(cfg.split_seed, 1));
  auto model = model_for_checkpoint(cfg, ds, checkpoint_path);
  return evaluate(model, ds, split, route);
}

void dump_embeddings_file(const ExperimentConfig& cfg, const std::string& checkpoint_path,
                          const std::string& data_path, DomainRole route,
                          const std::string& out_csv) {
  auto ds = load_dataset(data_path);
  auto model = model_for_checkpoint(cfg, ds, checkpoint_path);
  const int64_t width =
      static_cast<int64_t>(model.config().feature_channels()) * model.config().feature_len();

  std::ostringstream os;
  os.precision(17);
  os << "domain,subject,true_label,pred_label";
  for (int64_t i = 0; i < width; ++i) os << ",f" << i;
  os << "\n";

  NoGradGuard ng;
  const size_t chunk = 128;
  for (size_t start = 0; start < ds.records.size(); start += chunk) {
    const size_t end = std::min(ds.records.size(), start + chunk);
    std::vector<size_t> indices;
    for (size_t i = start; i < end; ++i) indices.push_back(i);
    auto batch = assemble_batch(ds, indices);
    auto out = model.forward(batch.signals, route, Phase::Eval);
    auto preds = argmax(out.probs, 1);
    const auto& feat = out.features.data();
    for (size_t i = 0; i < indices.size(); ++i) {
      const auto& rec = ds.records[indices[i]];
      os << domain_role_name(route) << ',' << rec.subject_id << ',' << rec.stage << ','
         << preds[i];
      for (int64_t j = 0; j < width; ++j) {
        os << ',' << feat[static_cast<size_t>(static_cast<int64_t>(i) * width + j)];
      }
      os << "\n";
    }
  }
  write_text_file(out_csv, os.str());
}

}  // namespace adast
