#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "core/checkpoint.hpp"
#include "core/model.hpp"
#include "core/rng.hpp"

using namespace adast;

namespace {

ModelConfig tiny_config() {
  ModelConfig cfg;
  cfg.epoch_len = 32;
  cfg.num_classes = 5;
  cfg.conv_channels = {4, 8};
  cfg.conv_kernels = {5, 3};
  cfg.conv_strides = {2, 1};
  cfg.conv_paddings = {0, 0};
  cfg.classifier_hidden = 8;
  cfg.discriminator_hidden = 8;
  return cfg;
}

Tensor random_input(int batch, int t, uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(static_cast<size_t>(batch * t));
  for (auto& x : v) x = rng.normal();
  return Tensor::from_data({batch, 1, t}, std::move(v));
}

void copy_params(AdastModel& model, const std::string& from_prefix, const std::string& to_prefix) {
  auto params = model.named_parameters();
  for (auto& src : params) {
    if (src.name.rfind(from_prefix, 0) != 0) continue;
    const std::string target_name = to_prefix + src.name.substr(from_prefix.size());
    for (auto& dst : params) {
      if (dst.name == target_name) dst.tensor.mutable_data() = src.tensor.data();
    }
  }
}

void set_param(AdastModel& model, const std::string& name, std::vector<double> values) {
  for (auto& p : model.named_parameters()) {
    if (p.name == name) {
      REQUIRE(p.tensor.data().size() == values.size());
      p.tensor.mutable_data() = std::move(values);
      return;
    }
  }
  FAIL("no parameter named ", name);
}

void fill_param(AdastModel& model, const std::string& name, double value) {
  for (auto& p : model.named_parameters()) {
    if (p.name == name) {
      std::fill(p.tensor.mutable_data().begin(), p.tensor.mutable_data().end(), value);
      return;
    }
  }
  FAIL("no parameter named ", name);
}

// Pin both classifier heads to constant probability outputs.
void rig_classifier(AdastModel& model, const char* prefix, const std::vector<double>& probs) {
  const std::string p(prefix);
  fill_param(model, p + ".fc1.weight", 0.0);
  fill_param(model, p + ".fc1.bias", 0.0);
  fill_param(model, p + ".fc2.weight", 0.0);
  std::vector<double> bias(probs.size());
  for (size_t i = 0; i < probs.size(); ++i) bias[i] = std::log(probs[i]);
  set_param(model, p + ".fc2.bias", std::move(bias));
}

}  // namespace

TEST_CASE("averaged prediction follows the classifier pair") {
  auto cfg = tiny_config();
  cfg.num_classes = 2;
  AdastModel model(cfg, 1);
  auto x = random_input(1, cfg.epoch_len, 11);

  SUBCASE("identical classifiers average to themselves") {
    copy_params(model, "C1.", "C2.");
    auto out = model.forward_source(x, Phase::Eval);
    cfg.use_dual_classifiers = false;
    AdastModel single(cfg, 1);
    // same parameters for the single-head model
    auto params = model.named_parameters();
    for (auto& q : single.named_parameters()) {
      for (auto& p : params) {
        if (p.name == q.name) q.tensor.mutable_data() = p.tensor.data();
      }
    }
    auto only_c1 = single.forward_source(x, Phase::Eval);
    CHECK(out.probs.data() == only_c1.probs.data());
  }

  SUBCASE("elementwise mean of the two heads") {
    rig_classifier(model, "C1", {0.6, 0.4});
    rig_classifier(model, "C2", {0.2, 0.8});
    auto out = model.forward_source(x, Phase::Eval);
    CHECK(out.probs.data()[0] == doctest::Approx(0.4).epsilon(1e-9));
    CHECK(out.probs.data()[1] == doctest::Approx(0.6).epsilon(1e-9));

    rig_classifier(model, "C1", {0.5, 0.5});
    rig_classifier(model, "C2", {0.5, 0.5});
    auto trg = model.forward_target(x, Phase::Eval);
    CHECK(trg.probs.data()[0] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(trg.probs.data()[1] == doctest::Approx(0.5).epsilon(1e-9));
  }
}

TEST_CASE("probability rows sum to one on both paths") {
  AdastModel model(tiny_config(), 3);
  auto x = random_input(2, 32, 17);
  auto src = model.forward_source(x, Phase::Eval);
  auto trg = model.forward_target(x, Phase::Eval);
  CHECK(src.probs.shape() == Shape{2, 5});
  for (const auto* out : {&src, &trg}) {
    for (int64_t b = 0; b < 2; ++b) {
      double s = 0.0;
      for (int64_t k = 0; k < 5; ++k) s += out->probs.data()[static_cast<size_t>(b * 5 + k)];
      CHECK(std::fabs(s - 1.0) < 1e-9);
    }
  }
  auto preds = argmax(model.forward_target(random_input(3, 32, 19), Phase::Eval).probs, 1);
  for (int64_t p : preds) {
    CHECK(p >= 0);
    CHECK(p < 5);
  }
}

TEST_CASE("wrong input length is a shape error") {
  AdastModel model(tiny_config(), 3);
  CHECK_THROWS_AS(model.forward_source(random_input(1, 31, 5), Phase::Eval), AdastError);
}

TEST_CASE("copied attention makes the two paths agree") {
  AdastModel model(tiny_config(), 5);
  copy_params(model, "A_s.", "A_t.");
  auto x = random_input(2, 32, 23);
  auto src = model.forward_source(x, Phase::Train);
  auto trg = model.forward_target(x, Phase::Train);
  CHECK(src.probs.data() == trg.probs.data());
  CHECK(src.features.data() == trg.features.data());
}

TEST_CASE("shared extractor vs unshared attention") {
  AdastModel model(tiny_config(), 7);
  auto x = random_input(2, 32, 29);
  const auto before = model.forward_target(x, Phase::Eval).probs.data();

  SUBCASE("mutating A_s leaves the target path untouched") {
    for (auto& p : model.named_parameters()) {
      if (p.name.rfind("A_s.", 0) == 0) {
        for (auto& v : p.tensor.mutable_data()) v += 0.5;
      }
    }
    CHECK(model.forward_target(x, Phase::Eval).probs.data() == before);
    // while the source path moved
    AdastModel fresh(tiny_config(), 7);
    CHECK(model.forward_source(x, Phase::Eval).probs.data() !=
          fresh.forward_source(x, Phase::Eval).probs.data());
  }

  SUBCASE("mutating F moves the target path") {
    fill_param(model, "F.block0.conv.weight", 0.123);
    CHECK(model.forward_target(x, Phase::Eval).probs.data() != before);
  }
}

TEST_CASE("discriminator output range") {
  AdastModel model(tiny_config(), 9);
  auto x = random_input(3, 32, 31);
  auto feat = model.features(x, DomainRole::Source, Phase::Eval);

  SUBCASE("zero head gives exactly 0.5") {
    fill_param(model, "D.fc1.weight", 0.0);
    fill_param(model, "D.fc1.bias", 0.0);
    fill_param(model, "D.fc2.weight", 0.0);
    fill_param(model, "D.fc2.bias", 0.0);
    auto d = model.discriminate(feat);
    CHECK(d.shape() == Shape{3});
    for (double v : d.data()) CHECK(v == 0.5);
  }
  SUBCASE("large positive bias saturates toward 1 but stays below") {
    fill_param(model, "D.fc2.bias", 100.0);
    auto d = model.discriminate(feat);
    for (double v : d.data()) {
      CHECK(v > 0.999);
      CHECK(v < 1.0);
    }
  }
  SUBCASE("random init stays strictly inside (0,1)") {
    auto d = model.discriminate(feat);
    for (double v : d.data()) {
      CHECK(v > 0.0);
      CHECK(v < 1.0);
      CHECK(std::isfinite(v));
    }
  }
  SUBCASE("bad feature geometry rejected") {
    CHECK_THROWS_AS(model.discriminate(random_input(1, 32, 3)), AdastError);
  }
}

TEST_CASE("classifier parameter vectors") {
  AdastModel model(tiny_config(), 11);

  SUBCASE("identical classifiers give identical vectors") {
    copy_params(model, "C1.", "C2.");
    auto [t1, t2] = model.classifier_param_vectors();
    CHECK(t1.data() == t2.data());
  }

  SUBCASE("row-major layer order, weights only") {
    auto [t1, t2] = model.classifier_param_vectors();
    const int64_t flat = 8 * model.config().feature_len();
    const int64_t expected = flat * 8 + 8 * 5;  // fc1 + fc2 weights, no biases
    CHECK(t1.numel() == expected);
    CHECK(t2.numel() == expected);

    // overwrite fc1.weight's first row to spot-check flattening order
    auto params = model.named_parameters();
    for (auto& p : params) {
      if (p.name == "C1.fc1.weight") {
        auto& d = p.tensor.mutable_data();
        for (size_t i = 0; i < d.size(); ++i) d[i] = static_cast<double>(i);
      }
    }
    auto [u1, u2] = model.classifier_param_vectors();
    for (int64_t i = 0; i < flat * 8; ++i) {
      CHECK(u1.data()[static_cast<size_t>(i)] == static_cast<double>(i));
    }
  }

  SUBCASE("distinct seeds give distinct classifier inits") {
    auto [t1, t2] = model.classifier_param_vectors();
    CHECK(t1.data() != t2.data());
  }
}

TEST_CASE("checkpoint round-trips bit-exactly") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "adast_ckpt_test";
  fs::create_directories(dir);
  const std::string path = (dir / "model.ckpt").string();

  AdastModel a(tiny_config(), 21);
  // make running stats non-trivial so buffers are exercised
  auto x = random_input(4, 32, 37);
  a.forward_source(x, Phase::Train);
  save_checkpoint(a, path);

  AdastModel b(tiny_config(), 22);
  load_checkpoint(b, path);
  auto pa = a.named_parameters();
  auto pb = b.named_parameters();
  REQUIRE(pa.size() == pb.size());
  for (size_t i = 0; i < pa.size(); ++i) {
    CHECK(pa[i].name == pb[i].name);
    CHECK(pa[i].tensor.data() == pb[i].tensor.data());
  }

  SUBCASE("bad magic is a format error") {
    const std::string bad = (dir / "bad.ckpt").string();
    std::ofstream out(bad, std::ios::binary);
    out << "XXXXXXXXjunk";
    out.close();
    try {
      load_checkpoint(b, bad);
      FAIL("expected format error");
    } catch (const AdastError& e) {
      CHECK(e.kind() == ErrorKind::Format);
    }
  }

  SUBCASE("truncated payload names a byte offset") {
    const std::string cut = (dir / "cut.ckpt").string();
    std::ifstream in(path, std::ios::binary);
    std::vector<char> all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::ofstream out(cut, std::ios::binary);
    out.write(all.data(), static_cast<std::streamsize>(all.size() / 2));
    out.close();
    try {
      load_checkpoint(b, cut);
      FAIL("expected format error");
    } catch (const AdastError& e) {
      CHECK(e.kind() == ErrorKind::Format);
      CHECK(std::string(e.what()).find("byte offset") != std::string::npos);
    }
  }

  SUBCASE("architecture mismatch is a compatibility error") {
    auto other = tiny_config();
    other.classifier_hidden = 6;
    AdastModel c(other, 21);
    try {
      load_checkpoint(c, path);
      FAIL("expected compatibility error");
    } catch (const AdastError& e) {
      CHECK(e.kind() == ErrorKind::Compat);
    }
  }
}
