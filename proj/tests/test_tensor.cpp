#include <doctest.h>

#include <cmath>

#include "core/rng.hpp"
#include "core/tensor.hpp"
#include "support/gradcheck.hpp"

using namespace adast;
using adast::testing::grad_check;

namespace {

Tensor random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(static_cast<size_t>(shape_numel(shape)));
  for (auto& x : v) x = rng.uniform(lo, hi);
  return Tensor::from_data(std::move(shape), std::move(v));
}

}  // namespace

TEST_CASE("tensor construction invariants") {
  auto t = Tensor::from_data({2, 3}, {1, 2, 3, 4, 5, 6});
  CHECK(t.numel() == 6);
  CHECK_FALSE(t.requires_grad());
  CHECK_THROWS_AS(Tensor::from_data({2, 2}, {1, 2, 3}), AdastError);
  CHECK_THROWS_AS(Tensor::from_data({0}, {}), AdastError);
  t.zero_grad();
  CHECK(t.grad().size() == t.data().size());
}

TEST_CASE("matmul examples") {
  auto eye = Tensor::from_data({2, 2}, {1, 0, 0, 1});
  auto v = Tensor::from_data({2, 1}, {3, 4});
  CHECK(matmul(eye, v).data() == std::vector<double>{3, 4});

  auto a = Tensor::from_data({1, 2}, {1, 2});
  CHECK(matmul(a, v).item() == doctest::Approx(11.0).epsilon(1e-15));

  auto z = matmul(Tensor::from_data({1, 1}, {2}), Tensor::from_data({1, 1}, {0}));
  CHECK(z.item() == 0.0);
}

TEST_CASE("matmul shape mismatch names both shapes") {
  auto a = Tensor::from_data({1, 2}, {1, 2});
  auto b = Tensor::from_data({3, 1}, {1, 2, 3});
  try {
    matmul(a, b);
    FAIL("expected shape error");
  } catch (const AdastError& e) {
    CHECK(e.kind() == ErrorKind::Shape);
    CHECK(std::string(e.what()).find("[1x2]") != std::string::npos);
    CHECK(std::string(e.what()).find("[3x1]") != std::string::npos);
  }
}

TEST_CASE("softmax examples") {
  auto s1 = softmax(Tensor::from_data({2}, {0, 0}), 0);
  CHECK(s1.data()[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(s1.data()[1] == doctest::Approx(0.5).epsilon(1e-15));

  auto s2 = softmax(Tensor::from_data({2}, {std::log(2.0), 0.0}), 0);
  CHECK(s2.data()[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(s2.data()[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  auto s3 = softmax(Tensor::from_data({2}, {1000.0, 0.0}), 0);
  CHECK(std::isfinite(s3.data()[0]));
  CHECK(s3.data()[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s3.data()[1] == doctest::Approx(0.0).epsilon(1e-12));

  CHECK_THROWS_AS(softmax(Tensor::from_data({2}, {std::nan(""), 0.0}), 0), AdastError);
}

TEST_CASE("softmax rows sum to one and are strictly positive") {
  Rng rng(7);
  for (int rep = 0; rep < 20; ++rep) {
    auto x = random_tensor({4, 6}, rng, -30.0, 30.0);
    auto y = softmax(x, 1);
    for (int64_t r = 0; r < 4; ++r) {
      double s = 0.0;
      for (int64_t c = 0; c < 6; ++c) {
        double v = y.data()[static_cast<size_t>(r * 6 + c)];
        CHECK(v > 0.0);
        s += v;
      }
      CHECK(std::fabs(s - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("cross_entropy examples") {
  auto confident = cross_entropy(Tensor::from_data({1, 2}, {1.0, 0.0}), {0});
  CHECK(confident.item() == doctest::Approx(0.0).epsilon(1e-12));

  auto half = cross_entropy(Tensor::from_data({1, 2}, {0.5, 0.5}), {1});
  CHECK(half.item() == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  auto quarter = cross_entropy(Tensor::from_data({1, 2}, {0.25, 0.75}), {0});
  CHECK(quarter.item() == doctest::Approx(std::log(4.0)).epsilon(1e-12));

  CHECK_THROWS_AS(cross_entropy(Tensor::from_data({1, 2}, {0.5, 0.5}), {2}), AdastError);
  CHECK_THROWS_AS(cross_entropy(Tensor::from_data({1, 2}, {0.5, 0.5}), {-1}), AdastError);
  CHECK_THROWS_AS(cross_entropy(Tensor::from_data({1, 2}, {0.9, 0.9}), {0}), AdastError);
}

TEST_CASE("backward examples") {
  SUBCASE("linear sum") {
    auto w = Tensor::from_data({3}, {1, 2, 3}, true);
    Tape tape;
    tape.backward(sum(w));
    CHECK(w.grad() == std::vector<double>{1, 1, 1});
  }
  SUBCASE("sum of squares") {
    auto w = Tensor::from_data({2}, {1, 2}, true);
    Tape tape;
    tape.backward(sum(mul(w, w)));
    CHECK(w.grad()[0] == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(w.grad()[1] == doctest::Approx(4.0).epsilon(1e-15));
  }
  SUBCASE("non-scalar loss is a rank error") {
    auto w = Tensor::from_data({2}, {1, 2}, true);
    Tape tape;
    auto y = mul(w, w);
    try {
      tape.backward(y);
      FAIL("expected rank error");
    } catch (const AdastError& e) {
      CHECK(e.kind() == ErrorKind::Rank);
    }
  }
  SUBCASE("empty tape rejected") {
    auto w = Tensor::scalar(1.0);
    Tape tape;
    CHECK_THROWS_AS(tape.backward(w), AdastError);
  }
}

TEST_CASE("backward accumulates across calls and doubles on a second pass") {
  auto w = Tensor::from_data({2}, {1.0, 2.0}, true);
  Tape tape;
  auto h = mul(w, w);
  auto loss = sum(mul(h, h));  // w^4: grad 4w^3 -> [4, 32]
  tape.backward(loss);
  const auto once = w.grad();
  CHECK(once[0] == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(once[1] == doctest::Approx(32.0).epsilon(1e-12));
  tape.backward(loss);
  CHECK(w.grad()[0] == doctest::Approx(2 * once[0]).epsilon(1e-12));
  CHECK(w.grad()[1] == doctest::Approx(2 * once[1]).epsilon(1e-12));

  // zero_grad then a fresh pass matches the single-pass gradient
  w.zero_grad();
  tape.backward(loss);
  CHECK(w.grad()[0] == doctest::Approx(once[0]).epsilon(1e-12));
}

TEST_CASE("gradient check: elementwise and reductions") {
  Rng rng(11);
  auto a = random_tensor({3, 4}, rng);
  auto b = random_tensor({3, 4}, rng);

  auto report = grad_check([&] { return sum(mul(add(a, b), sub(a, b))); }, {a, b});
  CAPTURE(report.worst);
  CHECK(report.ok);

  auto c = random_tensor({2, 5}, rng, 0.1, 2.0);
  report = grad_check([&] { return sum(log(mul_scalar(exp(c), 0.5))); }, {c});
  CAPTURE(report.worst);
  CHECK(report.ok);

  auto d = random_tensor({4, 3}, rng);
  report = grad_check([&] { return mean(mul(d, d)); }, {d});
  CHECK(report.ok);

  report = grad_check([&] { return sum(mean(mul(d, d), 1)); }, {d});
  CHECK(report.ok);

  report = grad_check([&] { return sum(sum(mul(d, add_scalar(d, 0.3)), 0)); }, {d});
  CHECK(report.ok);
}

TEST_CASE("gradient check: abs, relu, sigmoid away from kinks") {
  Rng rng(13);
  // keep magnitudes above 0.1 so the finite-difference probe never crosses 0
  std::vector<double> v(12);
  for (auto& x : v) {
    double m = rng.uniform(0.2, 1.0);
    x = rng.uniform() < 0.5 ? -m : m;
  }
  auto a = Tensor::from_data({3, 4}, v);

  auto report = grad_check([&] { return sum(abs(a)); }, {a}, 1e-4);
  CHECK(report.ok);
  report = grad_check([&] { return sum(relu(a)); }, {a}, 1e-4);
  CHECK(report.ok);
  report = grad_check([&] { return sum(mul(sigmoid(a), sigmoid(a))); }, {a});
  CHECK(report.ok);
}

TEST_CASE("gradient check: matmul, bmm, transpose, reshape, concat, softmax, cross_entropy") {
  Rng rng(17);
  auto a = random_tensor({3, 4}, rng);
  auto b = random_tensor({4, 2}, rng);
  auto report = grad_check([&] { return sum(mul(matmul(a, b), matmul(a, b))); }, {a, b});
  CAPTURE(report.worst);
  CHECK(report.ok);

  auto p = random_tensor({2, 3, 4}, rng);
  auto q = random_tensor({2, 4, 2}, rng);
  report = grad_check([&] { return sum(mul(bmm(p, q), bmm(p, q))); }, {p, q});
  CHECK(report.ok);

  report = grad_check([&] { return sum(mul(transpose(p, 1, 2), transpose(p, 1, 2))); }, {p});
  CHECK(report.ok);

  report = grad_check([&] { return sum(mul(reshape(p, {6, 4}), reshape(p, {6, 4}))); }, {p});
  CHECK(report.ok);

  auto c1 = random_tensor({2, 3}, rng);
  auto c2 = random_tensor({2, 2}, rng);
  report = grad_check(
      [&] {
        auto cc = concat({c1, c2}, 1);
        return sum(mul(cc, cc));
      },
      {c1, c2});
  CHECK(report.ok);

  auto logits = random_tensor({3, 5}, rng, -2.0, 2.0);
  report = grad_check([&] { return cross_entropy(softmax(logits, 1), {0, 3, 2}); }, {logits});
  CAPTURE(report.worst);
  CHECK(report.ok);

  report = grad_check([&] { return sum(mul(softmax(p, 1), softmax(p, 1))); }, {p});
  CHECK(report.ok);
}

TEST_CASE("argmax ties break to lowest index") {
  auto t = Tensor::from_data({2, 3}, {1, 3, 3, 2, 2, 1});
  auto ids = argmax(t, 1);
  CHECK(ids == std::vector<int64_t>{1, 0});
  auto cols = argmax(t, 0);
  CHECK(cols == std::vector<int64_t>{1, 0, 0});
}

TEST_CASE("no recording outside a tape or under NoGradGuard") {
  auto w = Tensor::from_data({2}, {1, 2}, true);
  auto y = mul(w, w);  // no tape active
  CHECK_FALSE(y.requires_grad());
  {
    Tape tape;
    NoGradGuard ng;
    auto z = mul(w, w);
    CHECK_FALSE(z.requires_grad());
    CHECK(tape.size() == 0);
  }
}

TEST_CASE("determinism: identical inputs give bit-identical outputs") {
  auto run = [](uint64_t seed) {
    Rng rng(seed);
    auto a = random_tensor({4, 4}, rng);
    auto b = random_tensor({4, 4}, rng);
    auto y = softmax(matmul(mul(a, b), transpose(a, 0, 1)), 1);
    return y.data();
  };
  CHECK(run(42) == run(42));
}
