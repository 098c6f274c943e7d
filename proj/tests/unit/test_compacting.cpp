#include <doctest.h>

#include <cmath>
#include <numbers>

#include "opno/compacting.hpp"
#include "opno/error.hpp"
#include "test_util.hpp"

using namespace opno;
using opno::test::max_abs_diff;
using opno::test::random_vector;

namespace {

std::vector<BoundaryCondition> all_bcs() {
  return {BoundaryCondition::dirichlet(), BoundaryCondition::neumann(),
          BoundaryCondition(1.0, -0.5, 2.0, 0.75), BoundaryCondition(0.3, 1.0, -0.2, 1.0),
          BoundaryCondition(1.0, 0.1, 1.0, -0.1)};
}

std::vector<double> phi(int k, const BasisPair& p) {
  std::vector<double> c(k + 3, 0.0);
  c[k] = 1.0;
  c[k + 1] = p.a;
  c[k + 2] = p.b;
  return c;
}

}  // namespace

TEST_CASE("BoundaryCondition: parsing, kinds and validation") {
  CHECK(BoundaryCondition::parse("dirichlet").kind() == BcKind::dirichlet);
  CHECK(BoundaryCondition::parse("neumann").kind() == BcKind::neumann);
  const auto r = BoundaryCondition::parse("robin:1,-0.5,2,0.75");
  CHECK(r.kind() == BcKind::robin);
  CHECK(r.a_minus() == 1.0);
  CHECK(r.b_minus() == -0.5);
  CHECK(r.a_plus() == 2.0);
  CHECK(r.b_plus() == 0.75);
  CHECK(BoundaryCondition::parse(r.to_string()) == r);
  // Scaled Dirichlet and Neumann conditions are still recognized.
  CHECK(BoundaryCondition(2.0, 0.0, 3.0, 0.0).kind() == BcKind::dirichlet);
  CHECK(BoundaryCondition(0.0, 5.0, 0.0, 1.0).kind() == BcKind::neumann);
  CHECK_THROWS_AS(BoundaryCondition(0.0, 0.0, 1.0, 0.0), InvalidArgument);
  CHECK_THROWS_AS(BoundaryCondition::parse("robin:1,2,3"), InvalidArgument);
  CHECK_THROWS_AS(BoundaryCondition::parse("periodic"), InvalidArgument);
}

TEST_CASE("compact_basis special cases") {
  for (int k = 0; k <= 200; ++k) {
    const BasisPair d = compact_basis(k, BoundaryCondition::dirichlet());
    CHECK(std::abs(d.a) <= 1e-13);
    CHECK(std::abs(d.b + 1.0) <= 1e-13);
    const BasisPair n = compact_basis(k, BoundaryCondition::neumann());
    const double expected = -double(k) * k / ((k + 2.0) * (k + 2.0));
    CHECK(std::abs(n.a) <= 1e-13);
    CHECK(std::abs(n.b - expected) <= 1e-13);
  }
}

TEST_CASE("compact_basis matches a direct 2x2 solve") {
  // Oracle: solve the two boundary equations for (a, b) with T_n(1) = 1,
  // T_n(-1) = (-1)^n, T_n'(1) = n^2, T_n'(-1) = (-1)^(n+1) n^2.
  const BoundaryCondition bc(1.0, -0.5, 2.0, 0.75);
  for (int k : {0, 1, 2, 9, 50}) {
    auto val = [](int n, double s) { return s > 0 ? 1.0 : (n % 2 ? -1.0 : 1.0); };
    auto der = [](int n, double s) {
      return s > 0 ? double(n) * n : (n % 2 ? 1.0 : -1.0) * n * n;
    };
    auto row = [&](double a, double b, double s, int n) { return a * val(n, s) + b * der(n, s); };
    const double m11 = row(bc.a_minus(), bc.b_minus(), -1, k + 1);
    const double m12 = row(bc.a_minus(), bc.b_minus(), -1, k + 2);
    const double m21 = row(bc.a_plus(), bc.b_plus(), 1, k + 1);
    const double m22 = row(bc.a_plus(), bc.b_plus(), 1, k + 2);
    const double r1 = -row(bc.a_minus(), bc.b_minus(), -1, k);
    const double r2 = -row(bc.a_plus(), bc.b_plus(), 1, k);
    const double det = m11 * m22 - m12 * m21;
    const BasisPair p = compact_basis(k, bc);
    CHECK(p.a == doctest::Approx((r1 * m22 - m12 * r2) / det).epsilon(1e-12));
    CHECK(p.b == doctest::Approx((m11 * r2 - r1 * m21) / det).epsilon(1e-12));
  }
}

TEST_CASE("every basis function satisfies its condition up to k = 200") {
  for (const auto& bc : all_bcs()) {
    double worst = 0.0;
    for (int k = 0; k <= 200; ++k) {
      worst = std::max(worst, bc.max_residual(phi(k, compact_basis(k, bc))));
    }
    CHECK(worst <= 1e-10);
  }
}

TEST_CASE("degenerate Robin mode is rejected") {
  // With a- = a+ = 1, b- = -t, b+ = t: DET_k = 2 + 2 S_k t + 2 P_k t^2 where
  // S_k = (k+1)^2 + (k+2)^2 and P_k = (k+1)^2 (k+2)^2. At t = -1/4 both
  // DET_0 = 2 - 5 + 3 and DET_1 = 2 - 13/2 + 9/2 vanish; DET_2 = 15/2 does not.
  const BoundaryCondition bc(1.0, 0.25, 1.0, -0.25);
  CHECK_THROWS_AS(compact_basis(0, bc), NumericError);
  CHECK_THROWS_AS(compact_basis(1, bc), NumericError);
  CHECK_NOTHROW(compact_basis(2, bc));
  CHECK_THROWS_AS(CompactBasis(bc, 16), NumericError);
}

TEST_CASE("compacting round trips for every condition") {
  for (const auto& bc : all_bcs()) {
    for (int n : {8, 64, 256}) {
      CompactCoeffs beta{random_vector(n - 1, n)};
      const ChebCoeffs alpha = compact_backward(beta, bc);
      CHECK(alpha.degree() == n);
      CHECK(max_abs_diff(compact_forward_recursive(alpha, bc).values, beta.values) <= 1e-11);
      // backward o forward on BC-satisfying grid data.
      const PhysicalField f = shen_backward(beta, bc);
      const PhysicalField g = shen_backward(shen_forward(f, bc), bc);
      CHECK(max_abs_diff(f.values, g.values) <= 1e-11);
      // Any sum of basis functions satisfies the condition.
      CHECK(bc.max_residual(alpha.values) <= 1e-9);
    }
  }
}

TEST_CASE("forward compacting of arbitrary data always lands in the basis") {
  for (const auto& bc : all_bcs()) {
    ChebCoeffs alpha{random_vector(65, 4)};
    const ChebCoeffs back = compact_backward(compact_forward_recursive(alpha, bc), bc);
    CHECK(bc.max_residual(back.values) <= 1e-10);
    // Rows 0..N-2 of the Chebyshev coefficients are preserved.
    const std::span<const double> head_back(back.values.data(), 63), head(alpha.values.data(), 63);
    CHECK(max_abs_diff(head_back, head) <= 1e-13);
  }
}

TEST_CASE("endpoint rows: beta_j = -alpha_{j+2} / p_{j+2} for basis data") {
  // p_{j+2} = j^2 / (j+2)^2 for Neumann and p = 1 for Dirichlet. The printed
  // endpoint factor 1 / p_j would give a different value.
  const int n = 32;
  CompactCoeffs beta{random_vector(n - 1, 11)};
  const ChebCoeffs an = compact_backward(beta, BoundaryCondition::neumann());
  const ChebCoeffs ad = compact_backward(beta, BoundaryCondition::dirichlet());
  for (int j : {n - 3, n - 2}) {
    const double p_j2 = double(j) * j / ((j + 2.0) * (j + 2.0));
    CHECK(beta.values[j] == doctest::Approx(-an.values[j + 2] / p_j2).epsilon(1e-13));
    CHECK(beta.values[j] == doctest::Approx(-ad.values[j + 2]).epsilon(1e-13));
    const double p_j = (j - 2.0) * (j - 2.0) / (double(j) * j);
    CHECK(std::abs(-an.values[j + 2] / p_j - beta.values[j]) > 1e-3 * std::abs(beta.values[j]));
  }
}

TEST_CASE("fast compacting equals the recursion up to N = 4096") {
  for (const auto& bc : {BoundaryCondition::dirichlet(), BoundaryCondition::neumann()}) {
    for (int n : {4, 5, 16, 255, 1024, 4096}) {
      ChebCoeffs alpha{random_vector(n + 1, 7 * n)};
      const auto r = compact_forward_recursive(alpha, bc);
      const auto f = compact_forward_fast(alpha, bc);
      REQUIRE(f.values.size() == r.values.size());
      CHECK(max_abs_diff(f.values, r.values) <= 1e-10);
    }
  }
  CHECK_THROWS_AS(compact_forward_fast(ChebCoeffs{random_vector(9, 1)},
                                       BoundaryCondition(1.0, -0.5, 2.0, 0.75)),
                  InvalidArgument);
}

TEST_CASE("compacting adjoints satisfy <Cx, y> = <x, C^T y>") {
  const int n = 64;
  for (const auto& bc : all_bcs()) {
    const CompactBasis& b = CompactBasis::get(bc, n);
    const auto beta = random_vector(n - 1, 1), alpha = random_vector(n + 1, 2);
    std::vector<double> out_a(n + 1), out_b(n - 1);
    b.backward(beta, out_a);
    b.backward_adjoint(alpha, out_b);
    CHECK(test::dot(out_a, alpha) == doctest::Approx(test::dot(beta, out_b)).epsilon(1e-12));
    b.forward(alpha, out_b);
    b.forward_adjoint(beta, out_a);
    CHECK(test::dot(out_b, beta) == doctest::Approx(test::dot(alpha, out_a)).epsilon(1e-12));
  }
}

TEST_CASE("Dirichlet basis values: phi_k = T_k - T_{k+2} vanishes at both ends") {
  const CompactCoeffs beta{{0, 0, 0, 1, 0, 0, 0}};  // phi_3 on N = 8
  const PhysicalField f = shen_backward(beta, BoundaryCondition::dirichlet());
  CHECK(std::abs(f.values.front()) < 1e-15);
  CHECK(std::abs(f.values.back()) < 1e-15);
  // Interior oracle at x_2 = -cos(pi/4): T_3 - T_5 = -cos(3pi/4) + cos(5pi/4) = 0.
  CHECK(std::abs(f.values[2]) < 1e-15);
  // x_1 = -cos(pi/8): -cos(3pi/8) + cos(5pi/8).
  CHECK(f.values[1] == doctest::Approx(-std::cos(3 * std::numbers::pi / 8) + std::cos(5 * std::numbers::pi / 8)));
}
