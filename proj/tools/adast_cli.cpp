// Experiment harness CLI. Talks to the library exclusively through the C API.
//
// Exit codes: 0 success, 2 config error, 3 data error, 4 numeric failure.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "adast/adast.h"

namespace {

int exit_code_for(adast_status status) {
  switch (status) {
    case ADAST_OK: return 0;
    case ADAST_ERROR_INVALID_ARGUMENT:
    case ADAST_ERROR_CONFIG: return 2;
    case ADAST_ERROR_DATA:
    case ADAST_ERROR_IO: return 3;
    case ADAST_ERROR_NUMERIC: return 4;
  }
  return 1;
}

[[nodiscard]] int report_failure(adast_status status) {
  std::cerr << "error (" << adast_status_name(status) << "): " << adast_last_error() << "\n";
  return exit_code_for(status);
}

struct ConfigHandle {
  adast_config* ptr = nullptr;
  ConfigHandle() { adast_config_create(&ptr); }
  ~ConfigHandle() { adast_config_destroy(ptr); }
  ConfigHandle(const ConfigHandle&) = delete;
  ConfigHandle& operator=(const ConfigHandle&) = delete;
};

// Common per-command options: --config file, then --set overrides in order.
struct CommonOpts {
  std::string config_path;
  std::vector<std::string> sets;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "experiment config file (key = value lines)");
    cmd->add_option("--set", sets, "override a config key, e.g. --set loss.lambda1=0.1")
        ->take_all();
  }

  adast_status apply(adast_config* cfg) const {
    if (!config_path.empty()) {
      if (auto st = adast_config_load_file(cfg, config_path.c_str()); st != ADAST_OK) return st;
    }
    for (const auto& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) {
        std::cerr << "error (config error): --set expects key=value, got '" << kv << "'\n";
        return ADAST_ERROR_CONFIG;
      }
      std::string key = kv.substr(0, eq);
      std::string value = kv.substr(eq + 1);
      while (!key.empty() && key.back() == ' ') key.pop_back();
      while (!value.empty() && value.front() == ' ') value.erase(value.begin());
      if (auto st = adast_config_set(cfg, key.c_str(), value.c_str()); st != ADAST_OK) return st;
    }
    return ADAST_OK;
  }
};

void print_file(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) return;
  std::cout << in.rdbuf();
}

adast_status set_if(adast_config* cfg, const char* key, const std::string& value) {
  if (value.empty()) return ADAST_OK;
  return adast_config_set(cfg, key, value.c_str());
}

bool parse_role(const std::string& name, adast_domain_role* out) {
  if (name == "source") {
    *out = ADAST_DOMAIN_SOURCE;
    return true;
  }
  if (name == "target") {
    *out = ADAST_DOMAIN_TARGET;
    return true;
  }
  return false;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adast: adversarial domain adaptation with self-training on synthetic "
               "domain-shifted biosignals"};
  app.require_subcommand(1);

  // ---- gen-data ----
  auto* gen = app.add_subcommand("gen-data", "generate a source/target epoch-file pair");
  CommonOpts gen_common;
  gen_common.attach(gen);
  std::string gen_out;
  std::string gen_seed, gen_subjects, gen_eps, gen_t, gen_scale, gen_freq, gen_noise, gen_resample;
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--seed", gen_seed, "data generation seed");
  gen->add_option("--subjects", gen_subjects, "subjects per domain");
  gen->add_option("--epochs-per-subject", gen_eps, "epochs per subject");
  gen->add_option("--t", gen_t, "samples per 30-second epoch");
  gen->add_option("--shift-scale", gen_scale, "target amplitude scale");
  gen->add_option("--shift-freq", gen_freq, "target frequency offset (Hz)");
  gen->add_option("--shift-noise", gen_noise, "target extra noise sigma");
  gen->add_option("--resample", gen_resample, "target simulated resample factor");

  // ---- train ----
  auto* train = app.add_subcommand("train", "run the adaptation (or source-only) experiment");
  CommonOpts train_common;
  train_common.attach(train);
  std::string train_out, train_seeds, train_seed, train_mode, train_parallel;
  train->add_option("--out", train_out, "output directory")->required();
  train->add_option("--seeds", train_seeds, "comma-separated training seeds");
  train->add_option("--seed", train_seed, "single training seed");
  train->add_option("--mode", train_mode, "adast | source-only")
      ->check(CLI::IsMember({"adast", "source-only"}));
  train->add_option("--parallel-seeds", train_parallel, "seed replicas to run in parallel");

  // ---- eval ----
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on an epoch file");
  CommonOpts eval_common;
  eval_common.attach(eval);
  std::string eval_ckpt, eval_data, eval_role = "target", eval_split = "test", eval_report;
  eval->add_option("--checkpoint", eval_ckpt, "checkpoint file")->required();
  eval->add_option("--data", eval_data, "epoch file")->required();
  eval->add_option("--route", eval_role, "domain path: source | target")
      ->check(CLI::IsMember({"source", "target"}));
  eval->add_option("--split", eval_split, "train | val | test")
      ->check(CLI::IsMember({"train", "val", "test"}));
  eval->add_option("--report", eval_report, "write the per-class report here");

  // ---- ablation ----
  auto* ablation = app.add_subcommand("ablation", "run the five-component ablation matrix");
  CommonOpts ablation_common;
  ablation_common.attach(ablation);
  std::string ablation_out, ablation_seeds, ablation_parallel;
  ablation->add_option("--out", ablation_out, "output directory")->required();
  ablation->add_option("--seeds", ablation_seeds, "comma-separated training seeds");
  ablation->add_option("--parallel-seeds", ablation_parallel, "seed replicas in parallel");

  // ---- sweep ----
  auto* sweep = app.add_subcommand("sweep", "sensitivity sweep over lambda1 or lambda2");
  CommonOpts sweep_common;
  sweep_common.attach(sweep);
  std::string sweep_out, sweep_seeds, sweep_parallel;
  int sweep_lambda = 1;
  sweep->add_option("--out", sweep_out, "output directory")->required();
  sweep->add_option("--lambda", sweep_lambda, "1 or 2")->check(CLI::IsMember({1, 2}));
  sweep->add_option("--seeds", sweep_seeds, "comma-separated training seeds");
  sweep->add_option("--parallel-seeds", sweep_parallel, "seed replicas in parallel");

  // ---- dump-embeddings ----
  auto* dump = app.add_subcommand("dump-embeddings", "export post-attention features as CSV");
  CommonOpts dump_common;
  dump_common.attach(dump);
  std::string dump_ckpt, dump_data, dump_role = "target", dump_out;
  dump->add_option("--checkpoint", dump_ckpt, "checkpoint file")->required();
  dump->add_option("--data", dump_data, "epoch file")->required();
  dump->add_option("--route", dump_role, "domain path: source | target")
      ->check(CLI::IsMember({"source", "target"}));
  dump->add_option("--out", dump_out, "output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  ConfigHandle config;
  if (config.ptr == nullptr) {
    std::cerr << "error: cannot allocate config\n";
    return 2;
  }

  if (gen->parsed()) {
    if (auto st = gen_common.apply(config.ptr); st != ADAST_OK) return report_failure(st);
    for (const auto& [key, value] :
         std::initializer_list<std::pair<const char*, const std::string&>>{
             {"data.seed", gen_seed},
             {"data.subjects", gen_subjects},
             {"data.epochs_per_subject", gen_eps},
             {"data.t", gen_t},
             {"shift.amplitude_scale", gen_scale},
             {"shift.frequency_offset_hz", gen_freq},
             {"shift.extra_noise_sigma", gen_noise},
             {"shift.resample_factor", gen_resample}}) {
      if (auto st = set_if(config.ptr, key, value); st != ADAST_OK) return report_failure(st);
    }
    if (auto st = adast_generate_data_files(config.ptr, gen_out.c_str()); st != ADAST_OK) {
      return report_failure(st);
    }
    print_file(gen_out + "/summary.txt");
    return 0;
  }

  if (train->parsed()) {
    if (auto st = train_common.apply(config.ptr); st != ADAST_OK) return report_failure(st);
    if (!train_seed.empty() && train_seeds.empty()) train_seeds = train_seed;
    if (auto st = set_if(config.ptr, "train.seeds", train_seeds); st != ADAST_OK) {
      return report_failure(st);
    }
    if (auto st = set_if(config.ptr, "train.mode", train_mode); st != ADAST_OK) {
      return report_failure(st);
    }
    if (auto st = set_if(config.ptr, "train.parallel_seeds", train_parallel); st != ADAST_OK) {
      return report_failure(st);
    }
    adast_run_summary summary{};
    if (auto st = adast_run_training(config.ptr, train_out.c_str(), &summary); st != ADAST_OK) {
      return report_failure(st);
    }
    print_file(train_out + "/summary.txt");
    return 0;
  }

  if (eval->parsed()) {
    if (auto st = eval_common.apply(config.ptr); st != ADAST_OK) return report_failure(st);
    adast_domain_role role;
    parse_role(eval_role, &role);
    adast_split split = eval_split == "train"  ? ADAST_SPLIT_TRAIN
                        : eval_split == "val" ? ADAST_SPLIT_VAL
                                              : ADAST_SPLIT_TEST;
    double acc = 0.0, mf1 = 0.0;
    if (auto st = adast_evaluate_checkpoint(config.ptr, eval_ckpt.c_str(), eval_data.c_str(), role,
                                            split, eval_report.empty() ? nullptr : eval_report.c_str(),
                                            &acc, &mf1);
        st != ADAST_OK) {
      return report_failure(st);
    }
    std::printf("%s %s acc %.6f mf1 %.6f\n", eval_role.c_str(), eval_split.c_str(), acc, mf1);
    return 0;
  }

  if (ablation->parsed()) {
    if (auto st = ablation_common.apply(config.ptr); st != ADAST_OK) return report_failure(st);
    if (auto st = set_if(config.ptr, "train.seeds", ablation_seeds); st != ADAST_OK) {
      return report_failure(st);
    }
    if (auto st = set_if(config.ptr, "train.parallel_seeds", ablation_parallel); st != ADAST_OK) {
      return report_failure(st);
    }
    if (auto st = adast_run_ablation(config.ptr, ablation_out.c_str()); st != ADAST_OK) {
      return report_failure(st);
    }
    print_file(ablation_out + "/ablation.csv");
    return 0;
  }

  if (sweep->parsed()) {
    if (auto st = sweep_common.apply(config.ptr); st != ADAST_OK) return report_failure(st);
    if (auto st = set_if(config.ptr, "train.seeds", sweep_seeds); st != ADAST_OK) {
      return report_failure(st);
    }
    if (auto st = set_if(config.ptr, "train.parallel_seeds", sweep_parallel); st != ADAST_OK) {
      return report_failure(st);
    }
    if (auto st = adast_run_sweep(config.ptr, sweep_lambda, sweep_out.c_str()); st != ADAST_OK) {
      return report_failure(st);
    }
    print_file(sweep_out + "/sweep.csv");
    return 0;
  }

  if (dump->parsed()) {
    if (auto st = dump_common.apply(config.ptr); st != ADAST_OK) return report_failure(st);
    adast_domain_role role;
    parse_role(dump_role, &role);
    if (auto st = adast_dump_embeddings(config.ptr, dump_ckpt.c_str(), dump_data.c_str(), role,
                                        dump_out.c_str());
        st != ADAST_OK) {
      return report_failure(st);
    }
    std::printf("wrote %s\n", dump_out.c_str());
    return 0;
  }

  return 2;
}
