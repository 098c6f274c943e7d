#pragma once

#include <span>
#include <string>
#include <vector>

#include "opno/chebyshev.hpp"

namespace opno {

enum class BcKind { dirichlet, neumann, robin };

/// Homogeneous Robin conditions
///   a_minus u(-1) + b_minus u'(-1) = 0,   a_plus u(1) + b_plus u'(1) = 0.
/// Derivatives are d/dx, not outward normals.
class BoundaryCondition {
 public:
  /// Throws InvalidArgument if either side is (0, 0) or non-finite.
  BoundaryCondition(double a_minus, double b_minus, double a_plus, double b_plus);

  static BoundaryCondition dirichlet() { return {1.0, 0.0, 1.0, 0.0}; }
  static BoundaryCondition neumann() { return {0.0, 1.0, 0.0, 1.0}; }
  /// Parses "dirichlet", "neumann" or "robin:a-,b-,a+,b+".
  static BoundaryCondition parse(const std::string& text);

  double a_minus() const { return a_minus_; }
  double b_minus() const { return b_minus_; }
  double a_plus() const { return a_plus_; }
  double b_plus() const { return b_plus_; }
  BcKind kind() const;
  std::string to_string() const;

  /// a u(+-1) + b u'(+-1) evaluated from Chebyshev coefficients.
  double residual(std::span<const double> cheb_coeffs, Side side) const;
  /// max over both sides of |residual|.
  double max_residual(std::span<const double> cheb_coeffs) const;

  bool operator==(const BoundaryCondition&) const = default;

 private:
  double a_minus_, b_minus_, a_plus_, b_plus_;
};

/// phi_k = T_k + a T_{k+1} + b T_{k+2}.
struct BasisPair {
  double a = 0.0;
  double b = 0.0;
};

/// Coefficients on phi_0..phi_{N-2} for a grid of degree N.
struct CompactCoeffs {
  std::vector<double> values;
  int degree() const { return static_cast<int>(values.size()) + 1; }
};

/// Closed-form (a_k, b_k) making phi_k satisfy `bc`. Throws NumericError when
/// the determinant for mode k vanishes.
BasisPair compact_basis(int k, const BoundaryCondition& bc);

/// Basis table for one (bc, degree) pair plus the O(N) compacting maps and
/// their adjoints. Immutable after construction.
class CompactBasis {
 public:
  /// Cached instance. Throws NumericError if any mode k <= N-2 is degenerate.
  static const CompactBasis& get(const BoundaryCondition& bc, int degree);

  CompactBasis(const BoundaryCondition& bc, int degree);

  const BoundaryCondition& bc() const { return bc_; }
  int degree() const { return degree_; }
  std::size_t cheb_size() const { return static_cast<std::size_t>(degree_) + 1; }
  std::size_t compact_size() const { return static_cast<std::size_t>(degree_) - 1; }
  BasisPair pair(int k) const { return {a_[k], b_[k]}; }

  /// beta (N-1) -> alpha (N+1): alpha_n = beta_n + a_{n-1} beta_{n-1} + b_{n-2} beta_{n-2}.
  void backward(std::span<const double> beta, std::span<double> alpha) const;
  /// alpha (N+1) -> beta (N-1) by forward substitution over rows 0..N-2;
  /// alpha_{N-1} and alpha_N are dropped. Left inverse of backward().
  void forward(std::span<const double> alpha, std::span<double> beta) const;

  void backward_adjoint(std::span<const double> alpha_grad, std::span<double> beta_grad) const;
  void forward_adjoint(std::span<const double> beta_grad, std::span<double> alpha_grad) const;

 private:
  BoundaryCondition bc_;
  int degree_;
  std::vector<double> a_, b_;
};

CompactCoeffs compact_forward_recursive(const ChebCoeffs& alpha, const BoundaryCondition& bc);
ChebCoeffs compact_backward(const CompactCoeffs& beta, const BoundaryCondition& bc);

/// Convolution-based forward compacting transform for Dirichlet and Neumann
/// conditions. Same contract as compact_forward_recursive. Throws
/// InvalidArgument for Robin conditions.
CompactCoeffs compact_forward_fast(const ChebCoeffs& alpha, const BoundaryCondition& bc);

/// Grid values -> compact coefficients (Chebyshev transform, then compacting).
CompactCoeffs shen_forward(const PhysicalField& field, const BoundaryCondition& bc);
/// Compact coefficients -> grid values of degree beta.degree().
PhysicalField shen_backward(const CompactCoeffs& beta, const BoundaryCondition& bc);

}  // namespace opno
