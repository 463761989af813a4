#pragma once

#include <string>
#include <vector>

#include "core/config.hpp"

namespace adast {

struct SeedResult {
  uint64_t seed = 0;
  double target_acc = 0.0;
  double target_mf1 = 0.0;
  double source_acc = 0.0;
  double source_mf1 = 0.0;
  double best_val_acc = 0.0;
  int best_epoch = -1;
};

struct RunSummary {
  double acc_mean = 0.0;
  double acc_std = 0.0;
  double mf1_mean = 0.0;
  double mf1_std = 0.0;
  std::vector<SeedResult> seeds;
};

struct DataPair {
  DomainDataset source;
  DomainDataset target;
};

// Loads the configured epoch files or generates the synthetic pair, then
// applies the subject-wise split to both domains.
DataPair prepare_datasets(const ExperimentConfig& cfg);

// One training experiment: validates the config, writes its serialized copy
// into out_dir, then runs every seed (train.parallel_seeds workers) and
// writes per-seed artifacts plus a mean ± std summary.
RunSummary run_training(const ExperimentConfig& cfg, const std::string& out_dir);

struct AblationRow {
  std::string variant;  // e.g. "att_dc_st"
  AblationToggles toggles;
  RunSummary summary;
};

// The five configurations of the component study: (-,-,-), ATT, ATT+DC,
// ATT+ST, ATT+DC+ST.
std::vector<AblationRow> run_ablation(const ExperimentConfig& cfg, const std::string& out_dir);

struct SweepRow {
  double lambda = 0.0;
  RunSummary summary;
};

// One full training per grid point (per seed); which_lambda selects λ1 or λ2.
// The other weight stays at its configured value.
std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, int which_lambda,
                                const std::string& out_dir);

// Writes source.adst / target.adst plus the resolved config; returns a
// human-readable dataset summary.
std::string generate_data_files(const ExperimentConfig& cfg, const std::string& out_dir);

// Rebuilds the model for the dataset's geometry, loads the checkpoint and
// evaluates one split through the given domain path.
EvalResult evaluate_checkpoint_file(const ExperimentConfig& cfg, const std::string& checkpoint_path,
                                    const std::string& data_path, DomainRole route, SplitId split);

// One CSV row per record: domain tag, subject, true label, predicted label,
// then the flattened post-attention feature vector.
void dump_embeddings_file(const ExperimentConfig& cfg, const std::string& checkpoint_path,
                          const std::string& data_path, DomainRole route,
                          const std::string& out_csv);

void write_text_file(const std::string& path, const std::string& content);
std::string summary_csv(const RunSummary& summary);
std::string summary_text(const RunSummary& summary, const std::string& title);

}  // namespace adast
