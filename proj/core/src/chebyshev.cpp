#include "opno/chebyshev.hpp"

#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

#include "opno/error.hpp"
#include "opno/fft.hpp"

namespace opno {
namespace {

constexpr double kPi = std::numbers::pi;

void require_degree(int degree) {
  if (degree < 2) {
    throw InvalidArgument("invalid CGL grid: degree must be >= 2, got " + std::to_string(degree));
  }
}

// c~_j: 2 at both ends of the grid, 1 inside.
inline double c_tilde(int j, int n) { return (j == 0 || j == n) ? 2.0 : 1.0; }

}  // namespace

GridSpec cgl_grid(int degree) {
  require_degree(degree);
  GridSpec grid;
  grid.degree = degree;
  grid.nodes.resize(degree + 1);
  grid.weights.resize(degree + 1);
  for (int j = 0; j <= degree; ++j) {
    // -cos(pi j / N) written as a sine, which is accurate near the ends.
    grid.nodes[j] = std::sin(kPi * (2.0 * j - degree) / (2.0 * degree));
    grid.weights[j] = kPi / (c_tilde(j, degree) * degree);
  }
  // Pin the endpoints and the exact midpoint against cos() rounding.
  grid.nodes.front() = -1.0;
  grid.nodes.back() = 1.0;
  if (degree % 2 == 0) grid.nodes[degree / 2] = 0.0;
  // Enforce antisymmetry so x_{N-j} == -x_j bitwise.
  for (int j = 0; j < (degree + 1) / 2; ++j) grid.nodes[degree - j] = -grid.nodes[j];
  return grid;
}

double map_interval(double x, double a, double b) {
  if (!(a < b)) throw InvalidArgument("map_interval: require a < b");
  return x * (b - a) / 2.0 + (a + b) / 2.0;
}

// ---------------------------------------------------------------------------

ChebyshevTransform::ChebyshevTransform(int degree) : degree_(degree) {
  require_degree(degree);
  RealFft::get(2 * static_cast<std::size_t>(degree));
}

const ChebyshevTransform& ChebyshevTransform::get(int degree) {
  require_degree(degree);
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<ChebyshevTransform>> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(degree);
  if (it == cache.end()) {
    it = cache.emplace(degree, std::unique_ptr<ChebyshevTransform>(new ChebyshevTransform(degree)))
             .first;
  }
  return *it->second;
}

void ChebyshevTransform::cosine_sum(std::span<const double> half, std::span<double> out) const {
  const std::size_t n = static_cast<std::size_t>(degree_);
  const RealFft& fft = RealFft::get(2 * n);
  thread_local std::vector<double> ext;
  thread_local std::vector<std::complex<double>> spec;
  ext.resize(2 * n);
  spec.resize(fft.spectrum_size());
  for (std::size_t j = 0; j <= n; ++j) ext[j] = half[j];
  for (std::size_t j = 1; j < n; ++j) ext[2 * n - j] = half[j];
  fft.forward(ext, spec);
  for (std::size_t k = 0; k <= n; ++k) out[k] = spec[k].real();
}

void ChebyshevTransform::forward(std::span<const double> values, std::span<double> coeffs) const {
  const int n = degree_;
  if (values.size() != size() || coeffs.size() != size()) {
    throw InvalidArgument("ChebyshevTransform::forward: length mismatch");
  }
  // Descending-node order turns T_n(x_j) into cos(pi n j / N).
  thread_local std::vector<double> half;
  half.resize(size());
  for (int j = 0; j <= n; ++j) half[j] = values[n - j];
  cosine_sum(half, coeffs);
  for (int k = 0; k <= n; ++k) coeffs[k] /= c_tilde(k, n) * n;
}

void ChebyshevTransform::backward(std::span<const double> coeffs, std::span<double> values) const {
  const int n = degree_;
  if (values.size() != size() || coeffs.size() != size()) {
    throw InvalidArgument("ChebyshevTransform::backward: length mismatch");
  }
  thread_local std::vector<double> half, sums;
  half.resize(size());
  sums.resize(size());
  for (int k = 0; k <= n; ++k) half[k] = coeffs[k] * (c_tilde(k, n) / 2.0);
  cosine_sum(half, sums);
  for (int j = 0; j <= n; ++j) values[j] = sums[n - j];
}

void ChebyshevTransform::forward_adjoint(std::span<const double> coeff_grad,
                                         std::span<double> value_grad) const {
  // F[n][j] = 2 T_n(x_j) / (c~_n c~_j N), so F^T g = (2 / (c~_j N)) B(g / c~).
  const int n = degree_;
  if (coeff_grad.size() != size() || value_grad.size() != size()) {
    throw InvalidArgument("ChebyshevTransform::forward_adjoint: length mismatch");
  }
  thread_local std::vector<double> scaled;
  scaled.resize(size());
  for (int k = 0; k <= n; ++k) scaled[k] = coeff_grad[k] / c_tilde(k, n);
  backward(scaled, value_grad);
  for (int j = 0; j <= n; ++j) value_grad[j] *= 2.0 / (c_tilde(j, n) * n);
}

void ChebyshevTransform::backward_adjoint(std::span<const double> value_grad,
                                          std::span<double> coeff_grad) const {
  // B[j][n] = T_n(x_j), so B^T h = (c~_n N / 2) F(c~ h).
  const int n = degree_;
  if (coeff_grad.size() != size() || value_grad.size() != size()) {
    throw InvalidArgument("ChebyshevTransform::backward_adjoint: length mismatch");
  }
  thread_local std::vector<double> scaled;
  scaled.resize(size());
  for (int j = 0; j <= n; ++j) scaled[j] = value_grad[j] * c_tilde(j, n);
  forward(scaled, coeff_grad);
  for (int k = 0; k <= n; ++k) coeff_grad[k] *= c_tilde(k, n) * n / 2.0;
}

// ---------------------------------------------------------------------------

ChebCoeffs cheb_forward_naive(const PhysicalField& field) {
  const int n = field.degree();
  require_degree(n);
  ChebCoeffs out;
  out.values.assign(n + 1, 0.0);
  for (int k = 0; k <= n; ++k) {
    double sum = 0.0;
    for (int j = 0; j <= n; ++j) {
      // T_k(x_j) = T_k(-cos(pi j/N)) = (-1)^k cos(pi k j/N); reduce k*j mod 2N exactly.
      const long long phase = (static_cast<long long>(k) * j) % (2LL * n);
      double t = std::cos(kPi * static_cast<double>(phase) / n);
      if (k % 2 == 1) t = -t;
      sum += field.values[j] * t / c_tilde(j, n);
    }
    out.values[k] = 2.0 * sum / (c_tilde(k, n) * n);
  }
  return out;
}

ChebCoeffs cheb_forward(const PhysicalField& field) {
  const int n = field.degree();
  require_degree(n);
  ChebCoeffs out;
  out.values.resize(n + 1);
  ChebyshevTransform::get(n).forward(field.values, out.values);
  return out;
}

PhysicalField cheb_backward(const ChebCoeffs& coeffs) {
  const int n = coeffs.degree();
  require_degree(n);
  PhysicalField out;
  out.values.resize(n + 1);
  ChebyshevTransform::get(n).backward(coeffs.values, out.values);
  return out;
}

ChebCoeffs cheb_diff(const ChebCoeffs& coeffs) {
  const int n = coeffs.degree();
  if (n < 0) throw InvalidArgument("cheb_diff: empty coefficient vector");
  ChebCoeffs out;
  out.values.assign(n + 1, 0.0);
  if (n == 0) return out;
  const auto& u = coeffs.values;
  auto& d = out.values;
  d[n - 1] = 2.0 * n * u[n];
  for (int k = n - 1; k >= 1; --k) {
    const double next = (k + 1 <= n) ? d[k + 1] : 0.0;
    d[k - 1] = (2.0 * k * u[k] + next) / (k - 1 == 0 ? 2.0 : 1.0);
  }
  return out;
}

ChebCoeffs cheb_diff_fft(const ChebCoeffs& coeffs) {
  // d_k = (2 / c_k) sum_{p = k+1, k+3, ...} p u_p. With g reversed, this is a
  // convolution against a kernel that is 1 at odd lags.
  const int n = coeffs.degree();
  if (n < 0) throw InvalidArgument("cheb_diff_fft: empty coefficient vector");
  ChebCoeffs out;
  out.values.assign(n + 1, 0.0);
  if (n == 0) return out;
  std::vector<double> reversed(n + 1), kernel(n + 1, 0.0);
  for (int p = 0; p <= n; ++p) reversed[n - p] = p * coeffs.values[p];
  for (int l = 1; l <= n; l += 2) kernel[l] = 1.0;
  const auto y = linear_convolution_fft(reversed, kernel);
  for (int k = 0; k < n; ++k) out.values[k] = (k == 0 ? 1.0 : 2.0) * y[n - k];
  return out;
}

double eval_boundary(std::span<const double> coeffs, Side side, int order) {
  if (order < 0 || order > 2) throw InvalidArgument("eval_boundary: order must be 0, 1 or 2");
  const double s = side == Side::plus ? 1.0 : -1.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    const double k = static_cast<double>(i);
    // T_k(+-1) = (+-1)^k, T_k'(+-1) = (+-1)^(k-1) k^2,
    // T_k''(+-1) = (+-1)^k k^2 (k^2 - 1) / 3.
    const double sign_k = (s < 0 && (i % 2 == 1)) ? -1.0 : 1.0;
    switch (order) {
      case 0: sum += coeffs[i] * sign_k; break;
      case 1: sum += coeffs[i] * sign_k * s * k * k; break;
      default: sum += coeffs[i] * sign_k * k * k * (k * k - 1.0) / 3.0; break;
    }
  }
  return sum;
}

double cheb_eval(std::span<const double> coeffs, double x) {
  double b1 = 0.0, b2 = 0.0;
  for (std::size_t i = coeffs.size(); i-- > 1;) {
    const double b0 = coeffs[i] + 2.0 * x * b1 - b2;
    b2 = b1;
    b1 = b0;
  }
  const double c0 = coeffs.empty() ? 0.0 : coeffs[0];
  return c0 + x * b1 - b2;
}

double cgl_quadrature(const PhysicalField& field) {
  const int n = field.degree();
  require_degree(n);
  double sum = 0.0;
  for (int j = 0; j <= n; ++j) sum += field.values[j] * kPi / (c_tilde(j, n) * n);
  return sum;
}

double clenshaw_curtis_integral(std::span<const double> coeffs) {
  double sum = 0.0;
  for (std::size_t k = 0; k < coeffs.size(); k += 2) {
    const double kk = static_cast<double>(k);
    sum += coeffs[k] * 2.0 / (1.0 - kk * kk);
  }
  return sum;
}

std::vector<double> resample(std::span<const double> values, int target_degree) {
  const int source = static_cast<int>(values.size()) - 1;
  require_degree(source);
  require_degree(target_degree);
  if (source == target_degree) return {values.begin(), values.end()};
  std::vector<double> coeffs(source + 1);
  ChebyshevTransform::get(source).forward(values, coeffs);
  coeffs.resize(target_degree + 1, 0.0);
  std::vector<double> out(target_degree + 1);
  ChebyshevTransform::get(target_degree).backward(coeffs, out);
  return out;
}

}  // namespace opno
