#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "adast/adast.h"

namespace {

namespace fs = std::filesystem;

fs::path fresh_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / "adast_capi" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

struct Config {
  adast_config* ptr = nullptr;
  Config() { REQUIRE(adast_config_create(&ptr) == ADAST_OK); }
  ~Config() { adast_config_destroy(ptr); }
};

void make_tiny(adast_config* cfg) {
  CHECK(adast_config_set(cfg, "data.subjects", "5") == ADAST_OK);
  CHECK(adast_config_set(cfg, "data.epochs_per_subject", "6") == ADAST_OK);
  CHECK(adast_config_set(cfg, "arch.conv_channels", "4,8") == ADAST_OK);
  CHECK(adast_config_set(cfg, "arch.conv_kernels", "15,7") == ADAST_OK);
  CHECK(adast_config_set(cfg, "arch.conv_strides", "3,1") == ADAST_OK);
  CHECK(adast_config_set(cfg, "arch.conv_paddings", "0,0") == ADAST_OK);
  CHECK(adast_config_set(cfg, "arch.classifier_hidden", "16") == ADAST_OK);
  CHECK(adast_config_set(cfg, "arch.discriminator_hidden", "16") == ADAST_OK);
  CHECK(adast_config_set(cfg, "train.pretrain_epochs", "1") == ADAST_OK);
  CHECK(adast_config_set(cfg, "train.epochs_per_round", "1") == ADAST_OK);
  CHECK(adast_config_set(cfg, "train.self_train_rounds", "1") == ADAST_OK);
  CHECK(adast_config_set(cfg, "train.batch_size", "16") == ADAST_OK);
  CHECK(adast_config_set(cfg, "train.seeds", "1") == ADAST_OK);
}

}  // namespace

TEST_CASE("config handle: set, get, validate, write") {
  Config config;
  char buf[128];
  CHECK(adast_config_get(config.ptr, "loss.lambda1", buf, sizeof buf) == ADAST_OK);
  CHECK(std::string(buf) == "0.01");

  CHECK(adast_config_set(config.ptr, "loss.lambda1", "0.25") == ADAST_OK);
  CHECK(adast_config_get(config.ptr, "loss.lambda1", buf, sizeof buf) == ADAST_OK);
  CHECK(std::string(buf) == "0.25");

  SUBCASE("unknown key surfaces as a config error with a message") {
    CHECK(adast_config_set(config.ptr, "zzz.nope", "1") == ADAST_ERROR_CONFIG);
    CHECK(std::string(adast_last_error()).find("zzz.nope") != std::string::npos);
  }
  SUBCASE("validation reports every problem through last_error") {
    CHECK(adast_config_set(config.ptr, "train.mode", "bogus") == ADAST_OK);
    CHECK(adast_config_set(config.ptr, "optim.lr", "0") == ADAST_OK);
    CHECK(adast_config_validate(config.ptr) == ADAST_ERROR_CONFIG);
    const std::string msg = adast_last_error();
    CHECK(msg.find("train.mode") != std::string::npos);
    CHECK(msg.find("optim.lr") != std::string::npos);
  }
  SUBCASE("too-small buffer is an invalid argument") {
    char tiny[2];
    CHECK(adast_config_get(config.ptr, "data.priors", tiny, sizeof tiny) ==
          ADAST_ERROR_INVALID_ARGUMENT);
  }
  SUBCASE("write + load round trip") {
    const auto dir = fresh_dir("cfg");
    const auto path = (dir / "a.cfg").string();
    CHECK(adast_config_write_file(config.ptr, path.c_str()) == ADAST_OK);
    Config other;
    CHECK(adast_config_load_file(other.ptr, path.c_str()) == ADAST_OK);
    CHECK(adast_config_get(other.ptr, "loss.lambda1", buf, sizeof buf) == ADAST_OK);
    CHECK(std::string(buf) == "0.25");
  }
  SUBCASE("null arguments are invalid") {
    CHECK(adast_config_set(nullptr, "a", "b") == ADAST_ERROR_INVALID_ARGUMENT);
    CHECK(adast_config_create(nullptr) == ADAST_ERROR_INVALID_ARGUMENT);
  }
}

TEST_CASE("dataset handles: generate, save, load, inspect") {
  Config config;
  make_tiny(config.ptr);
  adast_dataset* ds = nullptr;
  REQUIRE(adast_dataset_generate(config.ptr, ADAST_DOMAIN_TARGET, &ds) == ADAST_OK);

  adast_dataset_info info{};
  CHECK(adast_dataset_get_info(ds, &info) == ADAST_OK);
  CHECK(info.n_records == 30);
  CHECK(info.n_subjects == 5);
  CHECK(info.t == 300);
  CHECK(info.k == 5);

  uint64_t counts[5] = {0, 0, 0, 0, 0};
  CHECK(adast_dataset_class_histogram(ds, counts, 5) == ADAST_OK);
  uint64_t total = 0;
  for (uint64_t c : counts) total += c;
  CHECK(total == 30);

  const auto dir = fresh_dir("ds");
  const auto path = (dir / "t.adst").string();
  CHECK(adast_dataset_save(ds, path.c_str()) == ADAST_OK);
  adast_dataset* back = nullptr;
  REQUIRE(adast_dataset_load(path.c_str(), &back) == ADAST_OK);
  adast_dataset_info info2{};
  CHECK(adast_dataset_get_info(back, &info2) == ADAST_OK);
  CHECK(info2.n_records == info.n_records);
  adast_dataset_destroy(back);
  adast_dataset_destroy(ds);

  SUBCASE("bad file maps to a data error") {
    const auto bad = (dir / "bad.adst").string();
    {
      std::ofstream out(bad, std::ios::binary);
      out << "XXXX";
    }
    adast_dataset* nope = nullptr;
    CHECK(adast_dataset_load(bad.c_str(), &nope) == ADAST_ERROR_DATA);
    CHECK(std::string(adast_last_error()).find("magic") != std::string::npos);
  }
}

TEST_CASE("end-to-end training through the C surface") {
  Config config;
  make_tiny(config.ptr);
  const auto dir = fresh_dir("run");

  adast_run_summary summary{};
  REQUIRE(adast_run_training(config.ptr, (dir / "train").string().c_str(), &summary) == ADAST_OK);
  CHECK(summary.n_seeds == 1);
  CHECK(summary.acc_mean >= 0.0);
  CHECK(summary.acc_mean <= 1.0);
  CHECK(fs::exists(dir / "train" / "seed_1" / "checkpoint.bin"));

  // evaluate the produced checkpoint against a saved copy of the target data
  adast_dataset* trg = nullptr;
  REQUIRE(adast_dataset_generate(config.ptr, ADAST_DOMAIN_TARGET, &trg) == ADAST_OK);
  const auto data_path = (dir / "target.adst").string();
  REQUIRE(adast_dataset_save(trg, data_path.c_str()) == ADAST_OK);
  adast_dataset_destroy(trg);

  double acc = -1.0, mf1 = -1.0;
  const auto ckpt = (dir / "train" / "seed_1" / "checkpoint.bin").string();
  const auto report = (dir / "report.txt").string();
  CHECK(adast_evaluate_checkpoint(config.ptr, ckpt.c_str(), data_path.c_str(),
                                  ADAST_DOMAIN_TARGET, ADAST_SPLIT_TEST, report.c_str(), &acc,
                                  &mf1) == ADAST_OK);
  CHECK(acc >= 0.0);
  CHECK(acc <= 1.0);
  CHECK(fs::exists(report));
  CHECK(fs::exists(report + ".csv"));

  const auto csv = (dir / "emb.csv").string();
  CHECK(adast_dump_embeddings(config.ptr, ckpt.c_str(), data_path.c_str(), ADAST_DOMAIN_TARGET,
                              csv.c_str()) == ADAST_OK);
  CHECK(fs::exists(csv));

  SUBCASE("numeric status surfaces for a broken checkpoint geometry") {
    Config wrong;
    make_tiny(wrong.ptr);
    CHECK(adast_config_set(wrong.ptr, "arch.classifier_hidden", "24") == ADAST_OK);
    double a = 0, m = 0;
    CHECK(adast_evaluate_checkpoint(wrong.ptr, ckpt.c_str(), data_path.c_str(),
                                    ADAST_DOMAIN_TARGET, ADAST_SPLIT_TEST, nullptr, &a, &m) ==
          ADAST_ERROR_DATA);  // compatibility error
  }
}

TEST_CASE("version and status names") {
  CHECK(std::string(adast_version()) == "1.0.0");
  CHECK(std::string(adast_status_name(ADAST_OK)) == "ok");
  CHECK(std::string(adast_status_name(ADAST_ERROR_NUMERIC)) == "numeric error");
}
