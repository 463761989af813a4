#include <doctest.h>

#include <filesystem>

#include "core/config.hpp"
#include "core/harness.hpp"

using namespace adast;

TEST_CASE("config serialization round-trips through parsing") {
  ExperimentConfig cfg;
  cfg.loss_lambda1 = 0.025;
  cfg.train_seeds = {9, 8, 7};
  cfg.arch_conv_channels = {4, 8};
  const auto text = serialize_config(cfg);

  ExperimentConfig back;
  apply_config_text(back, text, "<mem>");
  CHECK(serialize_config(back) == text);
  CHECK(back.loss_lambda1 == 0.025);
  CHECK(back.train_seeds == std::vector<uint64_t>{9, 8, 7});
}

TEST_CASE("unknown keys and bad values are config errors") {
  ExperimentConfig cfg;
  try {
    config_set(cfg, "loss.lambda3", "1");
    FAIL("expected config error");
  } catch (const AdastError& e) {
    CHECK(e.kind() == ErrorKind::Config);
    CHECK(std::string(e.what()).find("loss.lambda3") != std::string::npos);
  }
  CHECK_THROWS_AS(config_set(cfg, "loss.lambda1", "abc"), AdastError);
  CHECK_THROWS_AS(config_set(cfg, "train.batch_size", "4.5"), AdastError);
  CHECK_THROWS_AS(config_set(cfg, "data.bands", "1,2,3"), AdastError);

  // line numbers are reported for file text
  try {
    apply_config_text(cfg, "loss.lambda1 = 0.1\nnope = 3\n", "cfg");
    FAIL("expected config error");
  } catch (const AdastError& e) {
    CHECK(std::string(e.what()).find("cfg:2") != std::string::npos);
  }
}

TEST_CASE("config text supports comments and blank lines") {
  ExperimentConfig cfg;
  apply_config_text(cfg,
                    "# a comment\n"
                    "\n"
                    "loss.lambda1 = 0.5  # trailing comment\n"
                    "train.mode = source-only\n",
                    "<mem>");
  CHECK(cfg.loss_lambda1 == 0.5);
  CHECK(cfg.train_mode == "source-only");
}

TEST_CASE("validation lists every problem at once") {
  ExperimentConfig cfg;
  cfg.loss_lambda1 = -1;
  cfg.optim_lr = 0;
  cfg.train_seeds.clear();
  cfg.train_mode = "bogus";
  auto problems = validate_config(cfg);
  CHECK(problems.size() >= 4);
  try {
    require_valid(cfg);
    FAIL("expected config error");
  } catch (const AdastError& e) {
    CHECK(e.kind() == ErrorKind::Config);
    CHECK(std::string(e.what()).find("lambda1") != std::string::npos);
    CHECK(std::string(e.what()).find("optim.lr") != std::string::npos);
    CHECK(std::string(e.what()).find("seeds") != std::string::npos);
    CHECK(std::string(e.what()).find("mode") != std::string::npos);
  }
}

TEST_CASE("defaults are valid and carry the documented values") {
  ExperimentConfig cfg;
  CHECK(validate_config(cfg).empty());
  CHECK(cfg.loss_lambda1 == 0.01);
  CHECK(cfg.loss_lambda2 == 0.001);
  CHECK(cfg.optim_lr == 1e-3);
  CHECK(cfg.optim_beta1 == 0.5);
  CHECK(cfg.optim_beta2 == 0.99);
  CHECK(cfg.optim_weight_decay == 3e-4);
  CHECK(cfg.optim_lr_decay_epoch == 10);
  CHECK(cfg.optim_lr_decay_factor == 0.1);
  CHECK(cfg.train_self_train_rounds == 2);
  CHECK(cfg.train_seeds.size() == 5);
  CHECK(cfg.split_train_frac == 0.6);
  CHECK(cfg.sweep_lambda1_grid.size() == 7);
}

TEST_CASE("config files load from disk") {
  const auto dir = std::filesystem::temp_directory_path() / "adast_cfg_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "exp.cfg").string();
  write_text_file(path, "data.subjects = 7\nshift.resample_factor = 0.9\n");
  auto cfg = load_config_file(path);
  CHECK(cfg.data_subjects == 7);
  CHECK(cfg.shift_resample_factor == 0.9);
  CHECK_THROWS_AS(load_config_file((dir / "missing.cfg").string()), AdastError);
}
