#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace opno {

/// Chebyshev-Gauss-Lobatto grid of polynomial degree N (N+1 points).
/// Nodes are ascending, x_j = -cos(pi j / N); weights are the CGL quadrature
/// weights for the Chebyshev weight (1 - x^2)^(-1/2).
struct GridSpec {
  int degree = 0;
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

/// Samples u(x_j) on a CGL grid of degree values.size() - 1.
struct PhysicalField {
  std::vector<double> values;
  int degree() const { return static_cast<int>(values.size()) - 1; }
};

/// Coefficients on T_0..T_N.
struct ChebCoeffs {
  std::vector<double> values;
  int degree() const { return static_cast<int>(values.size()) - 1; }
};

enum class Side { minus = -1, plus = 1 };

/// Throws InvalidArgument for N < 2.
GridSpec cgl_grid(int degree);

/// Affine map of x in [-1, 1] onto [a, b]. Throws for a >= b.
double map_interval(double x, double a, double b);

/// Precomputed fast Chebyshev transform for one degree. Uses an even
/// extension of length 2N and a real FFT. Immutable; shareable across threads.
class ChebyshevTransform {
 public:
  /// Cached instance for `degree` (>= 2).
  static const ChebyshevTransform& get(int degree);

  int degree() const { return degree_; }
  std::size_t size() const { return static_cast<std::size_t>(degree_) + 1; }

  /// Values at ascending CGL nodes -> coefficients on T_n.
  void forward(std::span<const double> values, std::span<double> coeffs) const;
  /// Coefficients on T_n -> values at ascending CGL nodes.
  void backward(std::span<const double> coeffs, std::span<double> values) const;

  /// Transposes of the two linear maps above, for reverse-mode gradients.
  void forward_adjoint(std::span<const double> coeff_grad, std::span<double> value_grad) const;
  void backward_adjoint(std::span<const double> value_grad, std::span<double> coeff_grad) const;

 private:
  explicit ChebyshevTransform(int degree);
  // Computes out_n = sum_j ext_j cos(pi n j / N) over the length-2N extension
  // built from in (already reversed to descending-node order by the caller).
  void cosine_sum(std::span<const double> ext_half, std::span<double> out) const;

  int degree_;
};

/// O(N^2) direct evaluation of the forward transform. Test oracle.
ChebCoeffs cheb_forward_naive(const PhysicalField& field);
/// O(N log N) forward transform, same contract as the naive one.
ChebCoeffs cheb_forward(const PhysicalField& field);
/// Inverse transform onto the grid of degree coeffs.degree().
PhysicalField cheb_backward(const ChebCoeffs& coeffs);

/// Derivative coefficients by the backward recursion. Output has the same
/// length as the input; the top coefficient is zero.
ChebCoeffs cheb_diff(const ChebCoeffs& coeffs);
/// Same contract as cheb_diff, computed as a parity-lag convolution via FFT.
ChebCoeffs cheb_diff_fft(const ChebCoeffs& coeffs);

/// u(+-1) for order 0, u'(+-1) for order 1, u''(+-1) for order 2.
double eval_boundary(std::span<const double> coeffs, Side side, int order);

/// Clenshaw evaluation of sum c_n T_n(x) at an arbitrary x in [-1, 1].
double cheb_eval(std::span<const double> coeffs, double x);

/// sum_j u(x_j) w_j: the Chebyshev-weighted integral, exact on P_{2N-1}.
double cgl_quadrature(const PhysicalField& field);

/// Unweighted integral over [-1, 1] of the interpolant (Clenshaw-Curtis).
double clenshaw_curtis_integral(std::span<const double> coeffs);

/// Spectral resampling: transform at the source degree, zero-pad or truncate
/// the coefficients, inverse transform on the target grid.
std::vector<double> resample(std::span<const double> values, int target_degree);

}  // namespace opno
