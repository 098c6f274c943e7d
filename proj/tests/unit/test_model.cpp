#include <doctest.h>

#include <cmath>

#include "opno/error.hpp"
#include "opno/evaluation.hpp"
#include "opno/model.hpp"
#include "opno/training.hpp"
#include "test_util.hpp"

using namespace opno;
using opno::test::max_abs_diff;
using opno::test::random_vector;

namespace {

ModelConfig small_config(const BoundaryCondition& bc = BoundaryCondition::neumann()) {
  ModelConfig c;
  c.layers = 2;
  c.width = 4;
  c.modes = 8;
  c.projection_hidden = 16;
  c.bc = bc;
  return c;
}

Matrix row(const std::vector<double>& v) {
  Matrix m(1, static_cast<Eigen::Index>(v.size()));
  std::copy(v.begin(), v.end(), m.data());
  return m;
}

}  // namespace

TEST_CASE("gelu oracles") {
  CHECK(gelu(0.0) == 0.0);
  CHECK(gelu(1.0) == doctest::Approx(0.8413447460685429).epsilon(1e-15));
  CHECK(gelu(-1.0) == doctest::Approx(-0.15865525393145707).epsilon(1e-15));
  CHECK(gelu_derivative(0.0) == doctest::Approx(0.5));
  for (double x : {-2.0, -0.3, 0.7, 3.0}) {
    const double h = 1e-6;
    CHECK(gelu_derivative(x) == doctest::Approx((gelu(x + h) - gelu(x - h)) / (2 * h)).epsilon(1e-8));
  }
}

TEST_CASE("parameter layout and count") {
  const ModelConfig c;  // 4 layers, width 50, 40 modes, bandwidth 3, hidden 128
  const ModelParams p(c);
  const std::size_t expected = 50 * 2                      // lift
                               + 4 * (40 * 3 * 50 * 50      // spectral
                                      + 50 * 50 + 50)       // pointwise + bias
                               + 128 * 50 + 128 + 128 + 1;  // projection
  CHECK(p.size() == expected);
  CHECK(p.block("layer2.spectral").shape == std::vector<std::size_t>{40, 3, 50, 50});
  CHECK_THROWS_AS(p.block("nope"), InvalidArgument);
  ModelConfig bad = c;
  bad.bandwidth = 2;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  CHECK_THROWS_AS(c.validate_for_degree(32), InvalidArgument);  // 40 modes > N - 1
}

TEST_CASE("init_params is deterministic and respects its ranges") {
  const ModelConfig c = small_config();
  const ModelParams a = init_params(c, 3), b = init_params(c, 3), d = init_params(c, 4);
  CHECK(a.data() == b.data());
  CHECK(a.data() != d.data());
  for (const auto& blk : a.blocks()) {
    double mx = 0.0;
    for (std::size_t i = 0; i < blk.size; ++i) mx = std::max(mx, std::abs(a.data()[blk.offset + i]));
    if (blk.name.find("bias") != std::string::npos) CHECK(mx == 0.0);
    if (blk.name.find("spectral") != std::string::npos) CHECK(mx <= 1.0 / (c.width * c.bandwidth));
  }
}

TEST_CASE("spectral kernel equals the hand-composed matrix at N = 8") {
  // d_v = 1, bandwidth 1, all weights one: K = B Cb P_M F, where F is the
  // naive transform matrix, P_M keeps modes < M and Cb is compact backward.
  const int n = 8, modes = 5;
  ModelConfig c;
  c.layers = 1;
  c.width = 1;
  c.modes = modes;
  c.bandwidth = 1;
  for (const auto& bc : {BoundaryCondition::neumann(), BoundaryCondition(1.0, -0.5, 2.0, 0.75)}) {
    c.bc = bc;
    ModelParams p(c);
    std::fill(p.data().begin(), p.data().end(), 1.0);
    const auto v = random_vector(n + 1, 17);
    const Matrix out = spectral_kernel(row(v), p.spectral(0), c);

    const GridSpec g = cgl_grid(n);
    std::vector<double> alpha(n + 1, 0.0);
    for (int k = 0; k <= n; ++k) {
      double s = 0.0;
      for (int j = 0; j <= n; ++j) {
        const double cj = (j == 0 || j == n) ? 2.0 : 1.0;
        s += v[j] * std::cos(k * std::acos(g.nodes[j])) / cj;
      }
      const double ck = (k == 0 || k == n) ? 2.0 : 1.0;
      alpha[k] = 2.0 * s / (ck * n);
    }
    // Read the first M Chebyshev coefficients as compact coefficients.
    std::vector<double> cheb(n + 1, 0.0);
    for (int m = 0; m < modes; ++m) {
      const BasisPair bp = compact_basis(m, bc);
      cheb[m] += alpha[m];
      cheb[m + 1] += bp.a * alpha[m];
      cheb[m + 2] += bp.b * alpha[m];
    }
    std::vector<double> expected(n + 1);
    for (int j = 0; j <= n; ++j) expected[j] = cheb_eval(cheb, g.nodes[j]);
    CHECK(max_abs_diff(std::span<const double>(out.data(), n + 1), expected) < 1e-13);
  }
}

TEST_CASE("layer with zero weights is the identity") {
  const ModelConfig c = small_config();
  const ModelParams p(c);
  Matrix v(c.width, 33);
  v.setRandom();
  CHECK((opno_layer(v, p, 0) - v).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("projection onto the basis is idempotent and enforces the condition") {
  for (const auto& bc : {BoundaryCondition::dirichlet(), BoundaryCondition::neumann(),
                         BoundaryCondition(1.0, -0.5, 2.0, 0.75)}) {
    Matrix q(2, 65);
    q.setRandom();
    const Matrix p1 = project_onto_basis(q, bc);
    const Matrix p2 = project_onto_basis(p1, bc);
    CHECK((p1 - p2).cwiseAbs().maxCoeff() < 1e-11);
    for (int r = 0; r < 2; ++r) {
      CHECK(boundary_error_spectral(std::span<const double>(p1.row(r).data(), 65), bc) < 1e-10);
    }
  }
}

TEST_CASE("untrained model output satisfies the condition for every parameter draw") {
  for (const auto& bc : {BoundaryCondition::dirichlet(), BoundaryCondition::neumann(),
                         BoundaryCondition(0.3, 1.0, -0.2, 1.0)}) {
    ModelConfig c = small_config(bc);
    c.width = 8;
    c.modes = 16;
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      const ModelParams p = init_params(c, seed);
      const Matrix out = model_forward(p, row(random_vector(257, seed + 100))).output;
      CHECK(boundary_error_spectral(std::span<const double>(out.data(), 257), bc) <= 1e-8);
    }
  }
}

TEST_CASE("forward modes agree and only training records a tape") {
  const ModelConfig c = small_config();
  const ModelParams p = init_params(c, 1);
  const Matrix in = row(random_vector(33, 2));
  const ForwardResult inf = model_forward(p, in);
  const ForwardResult tr = model_forward(p, in, ForwardMode::training);
  CHECK(!inf.tape.has_value());
  REQUIRE(tr.tape.has_value());
  CHECK(tr.tape->valid);
  CHECK(tr.tape->hidden.size() == static_cast<std::size_t>(c.layers + 1));
  CHECK((inf.output - tr.output).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(model_forward(p, row(random_vector(9, 2))), InvalidArgument);  // N=8 < modes+1
  ActivationTape empty;
  CHECK_THROWS_AS(model_backward(p, empty, tr.output), InvalidArgument);
}

TEST_CASE("gradient check at L=2, d_v=4, M=8, N=16") {
  ModelConfig c = small_config();
  const GradcheckReport r = gradcheck(c, 16, 5);
  CHECK(r.checked == init_params(c, 0).size());
  CHECK(r.max_rel_error <= 1e-5);
  CHECK(r.input_max_rel_error <= 1e-5);
  for (const auto& bc : {BoundaryCondition::dirichlet(), BoundaryCondition(1.0, -0.5, 2.0, 0.75)}) {
    c.bc = bc;
    CHECK(gradcheck(c, 16, 6).max_rel_error <= 1e-5);
  }
}

TEST_CASE("loss decreases along the negative gradient") {
  const ModelConfig c = small_config();
  ModelParams p = init_params(c, 9);
  const Matrix in = row(random_vector(33, 10));
  const auto target = random_vector(33, 11);
  auto loss = [&](const ModelParams& q) {
    const Matrix out = model_forward(q, in).output;
    return relative_l2(std::span<const double>(out.data(), 33), target);
  };
  const ForwardResult f = model_forward(p, in, ForwardMode::training);
  Matrix g(1, 33);
  relative_l2_with_grad(std::span<const double>(f.output.data(), 33), target,
                        std::span<double>(g.data(), 33));
  const BackwardResult b = model_backward(p, *f.tape, g);
  const double l0 = loss(p);
  ModelParams up = p, down = p;
  for (std::size_t i = 0; i < p.size(); ++i) {
    up.data()[i] += 1e-4 * b.grads.data()[i];
    down.data()[i] -= 1e-4 * b.grads.data()[i];
  }
  CHECK(loss(up) > l0);
  CHECK(loss(down) < l0);
}
