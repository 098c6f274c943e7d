#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <numbers>

#include "opno/error.hpp"
#include "opno/training.hpp"
#include "test_util.hpp"

using namespace opno;

namespace {

ModelConfig tiny_model() {
  ModelConfig c;
  c.layers = 2;
  c.width = 6;
  c.modes = 8;
  c.projection_hidden = 16;
  return c;
}

// Smooth Neumann-compatible pairs: u0 = a + b cos(pi x), u1 = 0.8 u0.
Dataset toy_dataset(int n_train, int n_test, int degree = 32) {
  Dataset d;
  d.x = cgl_grid(degree).nodes;
  auto fill = [&](Matrix& in, Matrix& out, int rows, std::uint64_t seed) {
    in.resize(rows, degree + 1);
    out.resize(rows, degree + 1);
    const auto coef = test::random_vector(2 * rows, seed);
    for (int r = 0; r < rows; ++r) {
      for (int j = 0; j <= degree; ++j) {
        const double wave = std::cos(std::numbers::pi * d.x[j]);
        const double u = 1.0 + 0.5 * coef[2 * r] + coef[2 * r + 1] * wave;
        in(r, j) = u;
        out(r, j) = 0.8 * u;
      }
    }
  };
  fill(d.train_in, d.train_out, n_train, 1);
  fill(d.test_in, d.test_out, n_test, 2);
  d.meta.degree = degree;
  return d;
}

}  // namespace

TEST_CASE("relative_l2 oracles") {
  const std::vector<double> ref{1.0, -2.0, 2.0};
  CHECK(relative_l2(ref, ref) == 0.0);
  CHECK(relative_l2(std::vector<double>{2.0, -4.0, 4.0}, ref) == 1.0);
  CHECK(relative_l2(std::vector<double>{0.0, 0.0, 0.0}, ref) == 1.0);
  CHECK(relative_l2(std::vector<double>{1.0, -2.0, 5.0}, ref) == doctest::Approx(1.0));
  CHECK_THROWS_AS(relative_l2(ref, std::vector<double>{0.0, 0.0, 0.0}), InvalidArgument);
  CHECK_THROWS_AS(relative_l2(ref, std::vector<double>{1.0}), InvalidArgument);
}

TEST_CASE("relative_l2 gradient matches finite differences") {
  const auto pred = test::random_vector(9, 1), ref = test::random_vector(9, 2);
  std::vector<double> g(9);
  relative_l2_with_grad(pred, ref, g);
  for (int i = 0; i < 9; ++i) {
    auto p = pred, m = pred;
    p[i] += 1e-6;
    m[i] -= 1e-6;
    const double fd = (relative_l2(p, ref) - relative_l2(m, ref)) / 2e-6;
    CHECK(g[i] == doctest::Approx(fd).epsilon(1e-7));
  }
}

TEST_CASE("adam_step closed forms") {
  SUBCASE("first step moves each entry by lr * sign(g)") {
    std::vector<double> p{1.0, 2.0, 3.0};
    const std::vector<double> g{0.5, -2.0, 1e-3};
    AdamState s(3);
    adam_step(p, g, s, 0.1);
    CHECK(s.step == 1);
    // m_hat = g and v_hat = g^2, so the update is lr g / (|g| + eps).
    for (int i = 0; i < 3; ++i) {
      const double start = i + 1.0;
      CHECK(p[i] == doctest::Approx(start - 0.1 * g[i] / (std::abs(g[i]) + 1e-8)).epsilon(1e-14));
      CHECK(std::abs(p[i] - (start - 0.1 * (g[i] > 0 ? 1 : -1))) < 1e-6);
    }
  }
  SUBCASE("zero gradient leaves parameters unchanged but advances the step") {
    std::vector<double> p{1.0, -1.0};
    AdamState s(2);
    adam_step(p, std::vector<double>{0.0, 0.0}, s, 0.1);
    CHECK(p == std::vector<double>{1.0, -1.0});
    CHECK(s.step == 1);
  }
  SUBCASE("shape mismatch") {
    std::vector<double> p{1.0};
    AdamState s(2);
    CHECK_THROWS_AS(adam_step(p, std::vector<double>{0.0}, s, 0.1), InvalidArgument);
  }
}

TEST_CASE("lr_schedule halves every halve_every epochs") {
  TrainConfig c;
  CHECK(lr_schedule(0, c) == 1e-3);
  CHECK(lr_schedule(499, c) == 1e-3);
  CHECK(lr_schedule(500, c) == 5e-4);
  CHECK(lr_schedule(1499, c) == 2.5e-4);
  for (int e = 1; e < 5000; ++e) CHECK(lr_schedule(e, c) <= lr_schedule(e - 1, c));
  c.halve_every = 0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  CHECK(TrainConfig::desk().epochs == 500);
}

TEST_CASE("zero-epoch run returns the initial parameters") {
  TrainState s = initial_state(tiny_model(), 3);
  const auto before = s.params.data();
  TrainConfig c;
  c.epochs = 0;
  train(s, toy_dataset(4, 2), c);
  CHECK(s.params.data() == before);
  CHECK(s.history.empty());
}

TEST_CASE("single-sample memorization drives the train loss below 0.1") {
  TrainState s = initial_state(tiny_model(), 1);
  TrainConfig c;
  c.epochs = 200;
  c.lr0 = 1e-2;
  c.halve_every = 100;
  train(s, toy_dataset(1, 0), c);
  CHECK(s.history.front().train_loss > s.history.back().train_loss);
  CHECK(s.history.back().train_loss < 0.1);
}

TEST_CASE("training is deterministic, thread-count independent and resumable") {
  const Dataset data = toy_dataset(7, 3);
  TrainConfig c;
  c.epochs = 6;
  c.batch_size = 3;
  c.test_every = 2;
  c.seed = 42;

  TrainState a = initial_state(tiny_model(), 42), b = a, r = a;
  train(a, data, c);
  c.threads = 3;
  train(b, data, c);
  CHECK(a.params.data() == b.params.data());
  CHECK(a.adam.m == b.adam.m);

  // Stop after three epochs, round-trip through a checkpoint, continue.
  c.threads = 1;
  TrainConfig half = c;
  half.epochs = 3;
  train(r, data, half);
  const auto path = std::filesystem::temp_directory_path() / "opno_resume_test.ckpt";
  save_checkpoint(path, r, half);
  TrainConfig stored;
  TrainState resumed = load_checkpoint(path, &stored);
  std::filesystem::remove(path);
  CHECK(stored.epochs == 3);
  CHECK(resumed.epoch == 3);
  train(resumed, data, c);
  CHECK(resumed.params.data() == a.params.data());
  REQUIRE(resumed.history.size() == a.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    CHECK(resumed.history[i].train_loss == a.history[i].train_loss);
  }
  // Test loss is recorded every test_every epochs and at the end only.
  CHECK(std::isnan(a.history[0].test_loss));
  CHECK(!std::isnan(a.history[1].test_loss));
  CHECK(!std::isnan(a.history[5].test_loss));
}

TEST_CASE("non-finite values abort training") {
  TrainState s = initial_state(tiny_model(), 0);
  TrainConfig c;
  c.epochs = 1;
  Dataset bad = toy_dataset(2, 0);
  bad.train_out(0, 3) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(train(s, bad, c), DataError);  // rejected by dataset validation
  // A non-finite parameter makes the loss itself NaN.
  s.params.proj_bias2()(0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(train(s, toy_dataset(2, 0), c), NumericError);
}

TEST_CASE("checkpoint preserves configuration and rejects foreign containers") {
  ModelConfig m = tiny_model();
  m.bc = BoundaryCondition(1.0, -0.5, 2.0, 0.75);
  TrainState s = initial_state(m, 5);
  s.history.push_back({0, 1e-3, 0.5, std::numeric_limits<double>::quiet_NaN()});
  TrainConfig c;
  c.seed = 77;
  TrainConfig back;
  const TrainState t = checkpoint_from_container(checkpoint_to_container(s, c), &back);
  CHECK(t.params.config().bc == m.bc);
  CHECK(t.params.config().width == m.width);
  CHECK(t.params.data() == s.params.data());
  CHECK(back.seed == 77);
  CHECK(std::isnan(t.history[0].test_loss));
  Container other;
  other.metadata = R"({"kind":"dataset"})";
  CHECK_THROWS_AS(checkpoint_from_container(other), DataError);
}
