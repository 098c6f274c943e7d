#pragma once

#include <span>
#include <vector>

namespace opno {

/// Square banded matrix with `lower` sub- and `upper` super-diagonals,
/// factored in place by Gaussian elimination with partial pivoting
/// (LAPACK gbtrf storage idea: the factor's upper band grows to lower+upper).
class BandedMatrix {
 public:
  BandedMatrix(int n, int lower, int upper);

  int size() const { return n_; }
  /// Entry (i, j); |j - i| must lie inside the declared band.
  double& at(int i, int j);
  double at(int i, int j) const;

  /// Factors in place. Throws NumericError on an exactly singular pivot.
  void factorize();
  bool factorized() const { return factorized_; }
  /// Solves A x = rhs in place. Requires factorize().
  void solve(std::span<double> rhs) const;

  /// y = A x using the unfactored entries (throws once factorized).
  std::vector<double> multiply(std::span<const double> x) const;

 private:
  std::size_t index(int i, int j) const;

  int n_, lower_, upper_, width_;
  std::vector<double> band_;
  std::vector<int> pivots_;
  bool factorized_ = false;
};

}  // namespace opno
