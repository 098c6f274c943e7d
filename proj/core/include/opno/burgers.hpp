#pragma once

#include <numbers>
#include <vector>

#include "opno/banded.hpp"
#include "opno/chebyshev.hpp"

namespace opno {

/// u_t + (u^2 / 2)_x = nu u_xx on [-1, 1], u_x(+-1, t) = 0.
struct BurgersProblem {
  double nu = 0.1 / std::numbers::pi;
  double final_time = 1.0;
  /// Time step; 0 selects default_dt(degree).
  double dt = 0.0;
  /// Quadrature padding factor for the u^2 product (1 disables dealiasing).
  double dealias = 1.5;

  /// 2.5e-4 up to degree 256, then scaled by (256 / degree)^2 for the
  /// convective stability limit of the clustered grid.
  static double default_dt(int degree);
  double effective_dt(int degree) const { return dt > 0.0 ? dt : default_dt(degree); }
};

struct BurgersDiagnostics {
  int steps = 0;
  double dt = 0.0;
  /// | int u(T) - int u(0) + int_0^T (u(1)^2 - u(-1)^2)/2 dt |.
  double mass_balance_error = 0.0;
  /// max over time of ||u - mean(u)||_2 on the grid, sampled every step.
  std::vector<double> deviation_history;
};

/// Method-of-lines Chebyshev solver. Convection is explicit (evaluated
/// pseudo-spectrally with padding), diffusion implicit; every stage solves
/// (I - lambda d_xx) y = r in the Neumann compact basis as a banded system.
/// Time integration is the ARS(4,4,3) IMEX Runge-Kutta scheme, which is
/// stiffly accurate so each step ends exactly in the Neumann basis.
class BurgersSolver {
 public:
  BurgersSolver(const BurgersProblem& problem, int degree);

  int degree() const { return degree_; }
  double dt() const { return dt_; }
  int steps() const { return steps_; }

  /// Advances u0 (values on the CGL grid) to final_time. Throws
  /// NumericError on non-finite values.
  std::vector<double> solve(std::span<const double> u0,
                            BurgersDiagnostics* diagnostics = nullptr) const;

  /// -(u^2/2)_x in Chebyshev coefficients.
  std::vector<double> convection(std::span<const double> coeffs) const;
  /// Solves (I - lambda d_xx) y = r (tau sense, rows 0..N-2) with y in the
  /// Neumann basis. Returns Chebyshev coefficients of y.
  std::vector<double> implicit_solve(std::span<const double> rhs) const;

 private:
  void tau_rhs(std::span<const double> r, std::span<double> out) const;

  BurgersProblem problem_;
  int degree_;
  double dt_;
  int steps_;
  double lambda_;
  int padded_degree_;
  BandedMatrix system_;
};

/// Convenience wrapper: one solve with a freshly built solver.
std::vector<double> solve_burgers(std::span<const double> u0, const BurgersProblem& problem,
                                  BurgersDiagnostics* diagnostics = nullptr);

}  // namespace opno
