#include "opno/burgers.hpp"

#include <cmath>
#include <string>

#include "opno/compacting.hpp"
#include "opno/error.hpp"

namespace opno {
namespace {

// ARS(4,4,3): explicit tableau (rows 1..4) and implicit tableau with
// diagonal gamma = 1/2. Stage 0 is the explicit start value.
constexpr double kGamma = 0.5;
constexpr double kExplicit[5][4] = {
    {0, 0, 0, 0},
    {1.0 / 2, 0, 0, 0},
    {11.0 / 18, 1.0 / 18, 0, 0},
    {5.0 / 6, -5.0 / 6, 1.0 / 2, 0},
    {1.0 / 4, 7.0 / 4, 3.0 / 4, -7.0 / 4},
};
constexpr double kImplicit[5][5] = {
    {0, 0, 0, 0, 0},
    {0, 1.0 / 2, 0, 0, 0},
    {0, 1.0 / 6, 1.0 / 2, 0, 0},
    {0, -1.0 / 2, 1.0 / 2, 1.0 / 2, 0},
    {0, 3.0 / 2, -3.0 / 2, 1.0 / 2, 1.0 / 2},
};

bool all_finite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace

double BurgersProblem::default_dt(int degree) {
  constexpr double base = 2.5e-4;
  if (degree <= 256) return base;
  const double r = 256.0 / degree;
  return base * r * r;
}

BurgersSolver::BurgersSolver(const BurgersProblem& problem, int degree)
    : problem_(problem),
      degree_(degree),
      dt_(0.0),
      steps_(0),
      lambda_(0.0),
      padded_degree_(degree),
      system_(std::max(degree - 1, 1), 2, 4) {
  if (degree < 4) throw InvalidArgument("Burgers solver needs degree >= 4");
  if (!(problem.nu > 0.0)) throw InvalidArgument("viscosity must be positive");
  if (!(problem.final_time > 0.0)) throw InvalidArgument("final time must be positive");
  if (problem.dt < 0.0) throw InvalidArgument("dt must be positive");
  if (!(problem.dealias >= 1.0)) throw InvalidArgument("dealias factor must be >= 1");
  const double dt_target = problem.effective_dt(degree);
  steps_ = static_cast<int>(std::ceil(problem.final_time / dt_target - 1e-9));
  dt_ = problem.final_time / steps_;
  lambda_ = kGamma * dt_ * problem.nu;
  padded_degree_ = static_cast<int>(std::ceil(problem.dealias * degree));

  // Rows k = 2..N of the twice-integrated tau system, unknowns beta_0..beta_{N-2}
  // with y_i = beta_i + b_{i-2} beta_{i-2} in the Neumann basis.
  const int n = degree;
  const CompactBasis& basis = CompactBasis::get(BoundaryCondition::neumann(), n);
  auto add_y = [&](int row, int i, double coef) {
    if (coef == 0.0) return;
    if (i <= n - 2) system_.at(row, i) += coef;
    if (i >= 2) system_.at(row, i - 2) += coef * basis.pair(i - 2).b;
  };
  for (int k = 2; k <= n; ++k) {
    const int row = k - 2;
    const double kk = k;
    const double c_km2 = (k - 2 == 0) ? 2.0 : 1.0;
    add_y(row, k - 2, -c_km2 / (4.0 * kk * (kk - 1.0)));
    add_y(row, k, lambda_ + (k <= n - 2 ? 1.0 / (2.0 * (kk * kk - 1.0)) : 0.0));
    if (k <= n - 4) add_y(row, k + 2, -1.0 / (4.0 * kk * (kk + 1.0)));
  }
  system_.factorize();
}

void BurgersSolver::tau_rhs(std::span<const double> r, std::span<double> out) const {
  const int n = degree_;
  for (int k = 2; k <= n; ++k) {
    const double kk = k;
    const double c_km2 = (k - 2 == 0) ? 2.0 : 1.0;
    double v = -c_km2 * r[k - 2] / (4.0 * kk * (kk - 1.0));
    if (k <= n - 2) v += r[k] / (2.0 * (kk * kk - 1.0));
    if (k <= n - 4) v -= r[k + 2] / (4.0 * kk * (kk + 1.0));
    out[k - 2] = v;
  }
}

std::vector<double> BurgersSolver::implicit_solve(std::span<const double> rhs) const {
  const int n = degree_;
  if (rhs.size() != static_cast<std::size_t>(n + 1)) {
    throw InvalidArgument("implicit_solve: rhs length mismatch");
  }
  std::vector<double> beta(n - 1);
  tau_rhs(rhs, beta);
  system_.solve(beta);
  std::vector<double> y(n + 1);
  CompactBasis::get(BoundaryCondition::neumann(), n).backward(beta, y);
  return y;
}

std::vector<double> BurgersSolver::convection(std::span<const double> coeffs) const {
  const int n = degree_, p = padded_degree_;
  std::vector<double> padded(p + 1, 0.0), values(p + 1);
  std::copy(coeffs.begin(), coeffs.end(), padded.begin());
  const auto& fp = ChebyshevTransform::get(p);
  fp.backward(padded, values);
  for (auto& v : values) v = v * v;
  fp.forward(values, padded);
  ChebCoeffs square;
  square.values.assign(padded.begin(), padded.begin() + n + 1);
  ChebCoeffs d = cheb_diff(square);
  for (auto& v : d.values) v *= -0.5;
  return std::move(d.values);
}

std::vector<double> BurgersSolver::solve(std::span<const double> u0,
                                         BurgersDiagnostics* diagnostics) const {
  const int n = degree_;
  if (u0.size() != static_cast<std::size_t>(n + 1)) {
    throw InvalidArgument("solve_burgers: initial data length does not match degree");
  }
  if (!all_finite(u0)) throw NumericError("solve_burgers: non-finite initial data");
  const auto& fct = ChebyshevTransform::get(n);
  const std::size_t len = n + 1;

  std::vector<double> u(len);
  fct.forward(u0, u);

  auto flux = [](std::span<const double> c) {
    const double up = eval_boundary(c, Side::plus, 0), um = eval_boundary(c, Side::minus, 0);
    return 0.5 * (up * up - um * um);
  };
  double flux_integral = 0.0;
  const double mass0 = clenshaw_curtis_integral(u);
  if (diagnostics) {
    diagnostics->deviation_history.clear();
    diagnostics->deviation_history.reserve(steps_ + 1);
  }
  auto record_deviation = [&](std::span<const double> c) {
    if (!diagnostics) return;
    std::vector<double> vals(len);
    fct.backward(c, vals);
    const double mean = clenshaw_curtis_integral(c) / 2.0;
    double s = 0.0;
    for (double v : vals) s += (v - mean) * (v - mean);
    diagnostics->deviation_history.push_back(std::sqrt(s));
  };
  record_deviation(u);

  std::vector<std::vector<double>> fe(5), fi(5), y(5);
  std::vector<double> rhs(len);
  for (int step = 0; step < steps_; ++step) {
    y[0] = u;
    fe[0] = convection(y[0]);
    double step_flux = kExplicit[4][0] * flux(y[0]);
    for (int i = 1; i <= 4; ++i) {
      for (std::size_t k = 0; k < len; ++k) {
        double v = y[0][k];
        for (int j = 0; j < i; ++j) v += dt_ * kExplicit[i][j] * fe[j][k];
        for (int j = 1; j < i; ++j) v += dt_ * kImplicit[i][j] * fi[j][k];
        rhs[k] = v;
      }
      y[i] = implicit_solve(rhs);
      fi[i].resize(len);
      for (std::size_t k = 0; k < len; ++k) fi[i][k] = (y[i][k] - rhs[k]) / (kGamma * dt_);
      if (i < 4) {
        fe[i] = convection(y[i]);
        step_flux += kExplicit[4][i] * flux(y[i]);
      }
    }
    u = y[4];
    flux_integral += dt_ * step_flux;
    if (!all_finite(u)) {
      throw NumericError("Burgers solver diverged at step " + std::to_string(step) +
                         " (t = " + std::to_string((step + 1) * dt_) + ")");
    }
    record_deviation(u);
  }

  if (diagnostics) {
    diagnostics->steps = steps_;
    diagnostics->dt = dt_;
    diagnostics->mass_balance_error =
        std::abs(clenshaw_curtis_integral(u) - mass0 + flux_integral);
  }
  std::vector<double> out(len);
  fct.backward(u, out);
  return out;
}

std::vector<double> solve_burgers(std::span<const double> u0, const BurgersProblem& problem,
                                  BurgersDiagnostics* diagnostics) {
  const int degree = static_cast<int>(u0.size()) - 1;
  return BurgersSolver(problem, degree).solve(u0, diagnostics);
}

}  // namespace opno
