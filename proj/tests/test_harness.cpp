#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "core/harness.hpp"

using namespace adast;

namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path fresh_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / "adast_harness" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Small enough to train in well under a second per run.
ExperimentConfig tiny_cfg() {
  ExperimentConfig cfg;
  cfg.data_subjects = 5;
  cfg.data_epochs_per_subject = 8;
  cfg.arch_conv_channels = {4, 8};
  cfg.arch_conv_kernels = {15, 7};
  cfg.arch_conv_strides = {3, 1};
  cfg.arch_conv_paddings = {0, 0};
  cfg.arch_classifier_hidden = 16;
  cfg.arch_discriminator_hidden = 16;
  cfg.train_pretrain_epochs = 1;
  cfg.train_epochs_per_round = 1;
  cfg.train_self_train_rounds = 1;
  cfg.train_batch_size = 16;
  cfg.train_seeds = {1, 2};
  return cfg;
}

}  // namespace

TEST_CASE("gen-data writes loadable files with the configured cohort") {
  const auto dir = fresh_dir("gendata");
  auto cfg = tiny_cfg();
  cfg.data_subjects = 20;
  cfg.data_epochs_per_subject = 5;
  auto summary = generate_data_files(cfg, dir.string());
  CHECK(summary.find("n=100") != std::string::npos);

  auto src = load_dataset((dir / "source.adst").string());
  auto trg = load_dataset((dir / "target.adst").string());
  CHECK(src.subjects().size() == 20);
  CHECK(trg.subjects().size() == 20);
  CHECK(src.records.size() == 100);
  CHECK(fs::exists(dir / "config.txt"));
  CHECK(fs::exists(dir / "summary.txt"));
}

TEST_CASE("run_training fans out per seed and summarizes") {
  const auto dir = fresh_dir("train");
  auto cfg = tiny_cfg();
  auto summary = run_training(cfg, dir.string());

  REQUIRE(summary.seeds.size() == 2);
  CHECK(summary.seeds[0].seed == 1);
  CHECK(summary.seeds[1].seed == 2);
  CHECK(fs::exists(dir / "config.txt"));
  CHECK(fs::exists(dir / "summary.csv"));
  CHECK(fs::exists(dir / "summary.txt"));
  for (const char* seed_dir : {"seed_1", "seed_2"}) {
    CHECK(fs::exists(dir / seed_dir / "metrics.csv"));
    CHECK(fs::exists(dir / seed_dir / "losses.csv"));
    CHECK(fs::exists(dir / seed_dir / "checkpoint.bin"));
    CHECK(fs::exists(dir / seed_dir / "eval_target_test.txt"));
  }
  auto metrics = slurp(dir / "seed_1" / "metrics.csv");
  CHECK(metrics.rfind("epoch,split,acc,mf1", 0) == 0);
  CHECK(metrics.find("target_val") != std::string::npos);
  CHECK(metrics.find("target_test") != std::string::npos);

  SUBCASE("identical config reproduces identical outputs") {
    const auto dir2 = fresh_dir("train_repeat");
    auto summary2 = run_training(cfg, dir2.string());
    CHECK(summary2.acc_mean == summary.acc_mean);
    CHECK(summary2.mf1_mean == summary.mf1_mean);
    CHECK(slurp(dir2 / "summary.csv") == slurp(dir / "summary.csv"));
    CHECK(slurp(dir2 / "seed_1" / "losses.csv") == slurp(dir / "seed_1" / "losses.csv"));
  }

  SUBCASE("parallel seed workers produce the sequential result") {
    const auto dir3 = fresh_dir("train_parallel");
    auto cfg_par = cfg;
    cfg_par.train_parallel_seeds = 2;
    auto summary3 = run_training(cfg_par, dir3.string());
    CHECK(summary3.acc_mean == summary.acc_mean);
    CHECK(slurp(dir3 / "seed_2" / "metrics.csv") == slurp(dir / "seed_2" / "metrics.csv"));
  }

  SUBCASE("evaluating the saved checkpoint reproduces the recorded test accuracy") {
    const auto data_dir = fresh_dir("train_data");
    generate_data_files(cfg, data_dir.string());
    auto cfg_files = cfg;
    cfg_files.data_source_path = (data_dir / "source.adst").string();
    cfg_files.data_target_path = (data_dir / "target.adst").string();
    const auto dir4 = fresh_dir("train_files");
    auto summary4 = run_training(cfg_files, dir4.string());

    auto eval = evaluate_checkpoint_file(cfg_files, (dir4 / "seed_1" / "checkpoint.bin").string(),
                                         cfg_files.data_target_path, DomainRole::Target,
                                         SplitId::Test);
    CHECK(eval.acc == summary4.seeds[0].target_acc);
    CHECK(eval.mf1 == summary4.seeds[0].target_mf1);
  }
}

TEST_CASE("invalid config fails before any filesystem writes") {
  const auto dir = fresh_dir("invalid");
  auto cfg = tiny_cfg();
  cfg.train_mode = "bogus";
  CHECK_THROWS_AS(run_training(cfg, (dir / "out").string()), AdastError);
  CHECK_FALSE(fs::exists(dir / "out" / "config.txt"));
}

TEST_CASE("ablation matrix runs the five component rows") {
  const auto dir = fresh_dir("ablation");
  auto cfg = tiny_cfg();
  cfg.train_seeds = {1};
  auto rows = run_ablation(cfg, dir.string());
  REQUIRE(rows.size() == 5);
  CHECK(rows[0].variant == "base");
  CHECK_FALSE(rows[0].toggles.use_attention);
  CHECK_FALSE(rows[0].toggles.use_dual_classifiers);
  CHECK_FALSE(rows[0].toggles.use_self_training);
  CHECK(rows[4].variant == "att_dc_st");
  CHECK(rows[4].toggles.use_attention);
  CHECK(fs::exists(dir / "ablation.csv"));
  for (const auto& row : rows) {
    CHECK(fs::exists(dir / ("variant_" + row.variant) / "summary.csv"));
  }

  // the full row is exactly a plain training run with the same config
  const auto dir2 = fresh_dir("ablation_full");
  auto full = run_training(cfg, dir2.string());
  CHECK(rows[4].summary.acc_mean == full.acc_mean);
  CHECK(rows[4].summary.mf1_mean == full.mf1_mean);
}

TEST_CASE("lambda sweep writes one row per grid point and holds the other weight") {
  const auto dir = fresh_dir("sweep");
  auto cfg = tiny_cfg();
  cfg.train_seeds = {1};
  cfg.sweep_lambda1_grid = {0.001, 1.0};
  auto rows = run_sweep(cfg, 1, dir.string());
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].lambda == 0.001);
  CHECK(rows[1].lambda == 1.0);
  auto csv = slurp(dir / "sweep.csv");
  CHECK(csv.rfind("lambda1,", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);  // header + 2 rows

  // each grid point's run dir holds a config with lambda2 untouched
  auto point_cfg = slurp(dir / "lambda1_1" / "config.txt");
  CHECK(point_cfg.find("loss.lambda1 = 1\n") != std::string::npos);
  CHECK(point_cfg.find("loss.lambda2 = 0.001\n") != std::string::npos);

  SUBCASE("a one-point grid matches plain training") {
    const auto dir2 = fresh_dir("sweep_one");
    auto cfg_one = cfg;
    cfg_one.sweep_lambda1_grid = {cfg.loss_lambda1};
    auto one = run_sweep(cfg_one, 1, dir2.string());
    const auto dir3 = fresh_dir("sweep_train");
    auto plain = run_training(cfg, dir3.string());
    CHECK(one[0].summary.acc_mean == plain.acc_mean);
  }
}

TEST_CASE("embedding dump has one row per record and d*l feature columns") {
  const auto data_dir = fresh_dir("embed_data");
  auto cfg = tiny_cfg();
  cfg.data_subjects = 5;
  cfg.data_epochs_per_subject = 4;
  generate_data_files(cfg, data_dir.string());
  cfg.data_source_path = (data_dir / "source.adst").string();
  cfg.data_target_path = (data_dir / "target.adst").string();
  cfg.train_seeds = {1};
  const auto run_dir = fresh_dir("embed_train");
  run_training(cfg, run_dir.string());

  const auto csv_path = (run_dir / "embeddings.csv").string();
  dump_embeddings_file(cfg, (run_dir / "seed_1" / "checkpoint.bin").string(),
                       cfg.data_target_path, DomainRole::Target, csv_path);
  auto csv = slurp(csv_path);
  const auto lines = std::count(csv.begin(), csv.end(), '\n');
  CHECK(lines == 21);  // header + 20 records

  // feature width d*l: channels 8, l from T=300 via (15,3)->pool->(7,1)->pool
  std::string header = csv.substr(0, csv.find('\n'));
  const auto commas = std::count(header.begin(), header.end(), ',');
  ModelConfig arch = to_model_config(cfg, 300, 5);
  CHECK(commas == 3 + arch.feature_channels() * arch.feature_len());
  CHECK(header.rfind("domain,subject,true_label,pred_label", 0) == 0);
  CHECK(csv.find("target,") != std::string::npos);

  SUBCASE("architecture mismatch is a compatibility error") {
    auto wrong = cfg;
    wrong.arch_classifier_hidden = 24;
    CHECK_THROWS_AS(dump_embeddings_file(wrong, (run_dir / "seed_1" / "checkpoint.bin").string(),
                                         cfg.data_target_path, DomainRole::Target, csv_path),
                    AdastError);
  }

  SUBCASE("dataset with mismatched T is incompatible") {
    auto cfg_t = cfg;
    cfg_t.data_t = 240;
    const auto other_dir = fresh_dir("embed_other");
    generate_data_files(cfg_t, other_dir.string());
    CHECK_THROWS_AS(dump_embeddings_file(cfg, (run_dir / "seed_1" / "checkpoint.bin").string(),
                                         (other_dir / "target.adst").string(), DomainRole::Target,
                                         csv_path),
                    AdastError);
  }
}
