#include "opno/banded.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "opno/error.hpp"

namespace opno {

BandedMatrix::BandedMatrix(int n, int lower, int upper)
    : n_(n), lower_(lower), upper_(upper), width_(2 * lower + upper + 1) {
  if (n < 1 || lower < 0 || upper < 0) throw InvalidArgument("BandedMatrix: bad dimensions");
  band_.assign(static_cast<std::size_t>(n) * width_, 0.0);
}

std::size_t BandedMatrix::index(int i, int j) const {
  const int off = j - i + lower_;
  if (i < 0 || i >= n_ || j < 0 || j >= n_ || off < 0 || off >= width_) {
    throw InvalidArgument("BandedMatrix: entry (" + std::to_string(i) + ", " + std::to_string(j) +
                          ") outside band");
  }
  return static_cast<std::size_t>(i) * width_ + off;
}

double& BandedMatrix::at(int i, int j) { return band_[index(i, j)]; }
double BandedMatrix::at(int i, int j) const { return band_[index(i, j)]; }

void BandedMatrix::factorize() {
  if (factorized_) return;
  pivots_.assign(n_, 0);
  const int reach = lower_ + upper_;
  for (int k = 0; k < n_; ++k) {
    const int last_row = std::min(k + lower_, n_ - 1);
    const int last_col = std::min(k + reach, n_ - 1);
    int p = k;
    double best = std::abs(band_[index(k, k)]);
    for (int i = k + 1; i <= last_row; ++i) {
      const double v = std::abs(band_[index(i, k)]);
      if (v > best) {
        best = v;
        p = i;
      }
    }
    if (best == 0.0) throw NumericError("banded system is singular at row " + std::to_string(k));
    pivots_[k] = p;
    if (p != k) {
      for (int j = k; j <= last_col; ++j) std::swap(band_[index(k, j)], band_[index(p, j)]);
    }
    const double pivot = band_[index(k, k)];
    for (int i = k + 1; i <= last_row; ++i) {
      const double l = band_[index(i, k)] / pivot;
      band_[index(i, k)] = l;
      if (l == 0.0) continue;
      for (int j = k + 1; j <= last_col; ++j) band_[index(i, j)] -= l * band_[index(k, j)];
    }
  }
  factorized_ = true;
}

void BandedMatrix::solve(std::span<double> rhs) const {
  if (!factorized_) throw InvalidArgument("BandedMatrix::solve before factorize");
  if (rhs.size() != static_cast<std::size_t>(n_)) throw InvalidArgument("BandedMatrix::solve: size");
  const int reach = lower_ + upper_;
  for (int k = 0; k < n_; ++k) {
    if (pivots_[k] != k) std::swap(rhs[k], rhs[pivots_[k]]);
    const int last_row = std::min(k + lower_, n_ - 1);
    for (int i = k + 1; i <= last_row; ++i) rhs[i] -= band_[index(i, k)] * rhs[k];
  }
  for (int k = n_ - 1; k >= 0; --k) {
    double v = rhs[k];
    const int last_col = std::min(k + reach, n_ - 1);
    for (int j = k + 1; j <= last_col; ++j) v -= band_[index(k, j)] * rhs[j];
    rhs[k] = v / band_[index(k, k)];
  }
}

std::vector<double> BandedMatrix::multiply(std::span<const double> x) const {
  if (factorized_) throw InvalidArgument("BandedMatrix::multiply after factorize");
  std::vector<double> y(n_, 0.0);
  for (int i = 0; i < n_; ++i) {
    const int lo = std::max(0, i - lower_), hi = std::min(n_ - 1, i + upper_);
    for (int j = lo; j <= hi; ++j) y[i] += band_[index(i, j)] * x[j];
  }
  return y;
}

}  // namespace opno
