#include "opno/compacting.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <tuple>

#include "opno/error.hpp"
#include "opno/fft.hpp"

namespace opno {

BoundaryCondition::BoundaryCondition(double a_minus, double b_minus, double a_plus, double b_plus)
    : a_minus_(a_minus), b_minus_(b_minus), a_plus_(a_plus), b_plus_(b_plus) {
  for (double v : {a_minus, b_minus, a_plus, b_plus}) {
    if (!std::isfinite(v)) throw InvalidArgument("boundary condition coefficients must be finite");
  }
  if (a_minus == 0.0 && b_minus == 0.0) {
    throw InvalidArgument("boundary condition at x=-1 has a = b = 0");
  }
  if (a_plus == 0.0 && b_plus == 0.0) {
    throw InvalidArgument("boundary condition at x=+1 has a = b = 0");
  }
}

BoundaryCondition BoundaryCondition::parse(const std::string& text) {
  if (text == "dirichlet") return dirichlet();
  if (text == "neumann") return neumann();
  const std::string prefix = "robin:";
  if (text.rfind(prefix, 0) == 0) {
    std::stringstream ss(text.substr(prefix.size()));
    double v[4];
    for (int i = 0; i < 4; ++i) {
      std::string item;
      if (!std::getline(ss, item, ',')) throw InvalidArgument("robin bc needs four coefficients");
      try {
        std::size_t used = 0;
        v[i] = std::stod(item, &used);
        if (used != item.size()) throw std::invalid_argument(item);
      } catch (const std::exception&) {
        throw InvalidArgument("bad robin coefficient '" + item + "'");
      }
    }
    std::string rest;
    if (std::getline(ss, rest, ',')) throw InvalidArgument("robin bc needs exactly four coefficients");
    return {v[0], v[1], v[2], v[3]};
  }
  throw InvalidArgument("unknown boundary condition '" + text + "'");
}

BcKind BoundaryCondition::kind() const {
  if (b_minus_ == 0.0 && b_plus_ == 0.0) return BcKind::dirichlet;
  if (a_minus_ == 0.0 && a_plus_ == 0.0) return BcKind::neumann;
  return BcKind::robin;
}

std::string BoundaryCondition::to_string() const {
  if (*this == dirichlet()) return "dirichlet";
  if (*this == neumann()) return "neumann";
  std::ostringstream os;
  os.precision(17);
  os << "robin:" << a_minus_ << ',' << b_minus_ << ',' << a_plus_ << ',' << b_plus_;
  return os.str();
}

double BoundaryCondition::residual(std::span<const double> cheb_coeffs, Side side) const {
  const double u = eval_boundary(cheb_coeffs, side, 0);
  const double du = eval_boundary(cheb_coeffs, side, 1);
  return side == Side::minus ? a_minus_ * u + b_minus_ * du : a_plus_ * u + b_plus_ * du;
}

double BoundaryCondition::max_residual(std::span<const double> cheb_coeffs) const {
  return std::max(std::abs(residual(cheb_coeffs, Side::minus)),
                  std::abs(residual(cheb_coeffs, Side::plus)));
}

// ---------------------------------------------------------------------------

BasisPair compact_basis(int k, const BoundaryCondition& bc) {
  if (k < 0) throw InvalidArgument("compact_basis: mode index must be >= 0");
  const double am = bc.a_minus(), bm = bc.b_minus(), ap = bc.a_plus(), bp = bc.b_plus();
  const double k0 = k, k1 = k + 1.0, k2 = k + 2.0;
  const double det = 2.0 * ap * am + (k1 * k1 + k2 * k2) * (am * bp - ap * bm) -
                     2.0 * bm * bp * k1 * k1 * k2 * k2;
  const double scale = 2.0 * std::abs(ap * am) +
                       (k1 * k1 + k2 * k2) * (std::abs(am * bp) + std::abs(ap * bm)) +
                       2.0 * std::abs(bm * bp) * k1 * k1 * k2 * k2;
  if (!(std::abs(det) > 1e-13 * scale)) {
    throw NumericError("compact basis is degenerate (DET_k = 0) at mode k = " + std::to_string(k));
  }
  BasisPair p;
  p.a = 4.0 * k1 * (ap * bm + am * bp) / det;
  p.b = (-2.0 * am * ap + (k0 * k0 + k1 * k1) * (ap * bm - am * bp) +
         2.0 * bm * bp * k0 * k0 * k1 * k1) /
        det;
  return p;
}

CompactBasis::CompactBasis(const BoundaryCondition& bc, int degree) : bc_(bc), degree_(degree) {
  if (degree < 2) throw InvalidArgument("compact basis needs degree >= 2");
  a_.resize(degree - 1);
  b_.resize(degree - 1);
  for (int k = 0; k <= degree - 2; ++k) {
    const BasisPair p = compact_basis(k, bc);
    a_[k] = p.a;
    b_[k] = p.b;
  }
}

const CompactBasis& CompactBasis::get(const BoundaryCondition& bc, int degree) {
  using Key = std::tuple<double, double, double, double, int>;
  static std::mutex mutex;
  static std::map<Key, std::unique_ptr<CompactBasis>> cache;
  const Key key{bc.a_minus(), bc.b_minus(), bc.a_plus(), bc.b_plus(), degree};
  std::lock_guard lock(mutex);
  auto it = cache.find(key);
  if (it == cache.end()) {
    it = cache.emplace(key, std::make_unique<CompactBasis>(bc, degree)).first;
  }
  return *it->second;
}

void CompactBasis::backward(std::span<const double> beta, std::span<double> alpha) const {
  if (beta.size() != compact_size() || alpha.size() != cheb_size()) {
    throw InvalidArgument("compact backward: length mismatch");
  }
  const int m = degree_ - 1;  // number of compact modes
  for (int n = 0; n <= degree_; ++n) {
    double v = n < m ? beta[n] : 0.0;
    if (n >= 1 && n - 1 < m) v += a_[n - 1] * beta[n - 1];
    if (n >= 2 && n - 2 < m) v += b_[n - 2] * beta[n - 2];
    alpha[n] = v;
  }
}

void CompactBasis::forward(std::span<const double> alpha, std::span<double> beta) const {
  if (beta.size() != compact_size() || alpha.size() != cheb_size()) {
    throw InvalidArgument("compact forward: length mismatch");
  }
  const int m = degree_ - 1;
  for (int n = 0; n < m; ++n) {
    double v = alpha[n];
    if (n >= 1) v -= a_[n - 1] * beta[n - 1];
    if (n >= 2) v -= b_[n - 2] * beta[n - 2];
    beta[n] = v;
  }
}

void CompactBasis::backward_adjoint(std::span<const double> alpha_grad,
                                    std::span<double> beta_grad) const {
  if (beta_grad.size() != compact_size() || alpha_grad.size() != cheb_size()) {
    throw InvalidArgument("compact backward adjoint: length mismatch");
  }
  const int m = degree_ - 1;
  for (int k = 0; k < m; ++k) {
    beta_grad[k] = alpha_grad[k] + a_[k] * alpha_grad[k + 1] + b_[k] * alpha_grad[k + 2];
  }
}

void CompactBasis::forward_adjoint(std::span<const double> beta_grad,
                                   std::span<double> alpha_grad) const {
  if (beta_grad.size() != compact_size() || alpha_grad.size() != cheb_size()) {
    throw InvalidArgument("compact forward adjoint: length mismatch");
  }
  // Back substitution with the transposed unit lower-triangular band.
  const int m = degree_ - 1;
  alpha_grad[degree_] = 0.0;
  alpha_grad[degree_ - 1] = 0.0;
  for (int k = m - 1; k >= 0; --k) {
    double v = beta_grad[k];
    if (k + 1 < m) v -= a_[k] * alpha_grad[k + 1];
    if (k + 2 < m) v -= b_[k] * alpha_grad[k + 2];
    alpha_grad[k] = v;
  }
}

// ---------------------------------------------------------------------------

CompactCoeffs compact_forward_recursive(const ChebCoeffs& alpha, const BoundaryCondition& bc) {
  const int n = alpha.degree();
  const CompactBasis& basis = CompactBasis::get(bc, n);
  CompactCoeffs out;
  out.values.resize(basis.compact_size());
  basis.forward(alpha.values, out.values);
  return out;
}

ChebCoeffs compact_backward(const CompactCoeffs& beta, const BoundaryCondition& bc) {
  const int n = beta.degree();
  const CompactBasis& basis = CompactBasis::get(bc, n);
  ChebCoeffs out;
  out.values.resize(basis.cheb_size());
  basis.backward(beta.values, out.values);
  return out;
}

CompactCoeffs compact_forward_fast(const ChebCoeffs& alpha, const BoundaryCondition& bc) {
  const BcKind kind = bc.kind();
  if (kind == BcKind::robin) {
    throw InvalidArgument("compact_forward_fast supports dirichlet and neumann only");
  }
  const int n = alpha.degree();
  if (n < 2) throw InvalidArgument("compact_forward_fast: degree must be >= 2");
  // Both cases reduce to beta~_j = beta~_{j-2} + alpha~_j: a convolution with
  // a kernel that is 1 at even lags 0, 2, 4, ...
  // Any Dirichlet (resp. Neumann) scaling yields the same basis, so only the
  // kind matters here.
  const int m = n - 1;
  std::vector<double> scaled(m);
  if (kind == BcKind::dirichlet) {
    for (int j = 0; j < m; ++j) scaled[j] = alpha.values[j];
  } else {
    // beta~_j = j^2 beta_j turns p_j beta_{j-2} + alpha_j into a plain prefix sum.
    for (int j = 0; j < m; ++j) scaled[j] = static_cast<double>(j) * j * alpha.values[j];
  }

  // The Neumann scaling spans j^2 ~ N^2, and FFT roundoff is proportional to
  // the largest input, so one global convolution loses about N^2 * eps at
  // small j after dividing by j^2. Convolving dyadic blocks [2^k, 2^(k+1))
  // separately and carrying the two parity sums forward keeps the error of
  // output j relative to its own scale. The cost stays O(N log N).
  std::vector<double> y(m), kernel;
  double carry[2] = {0.0, 0.0};
  for (int start = 0; start < m;) {
    const int end = std::min(m, start == 0 ? 1 : 2 * start);
    const int len = end - start;
    kernel.assign(len, 0.0);
    for (int l = 0; l < len; l += 2) kernel[l] = 1.0;
    const std::span<const double> block(scaled.data() + start, len);
    const auto conv = linear_convolution_fft(block, kernel);
    for (int j = start; j < end; ++j) y[j] = conv[j - start] + carry[j % 2];
    for (int j = std::max(start, end - 2); j < end; ++j) carry[j % 2] = y[j];
    start = end;
  }

  CompactCoeffs out;
  out.values.resize(m);
  if (kind == BcKind::dirichlet) {
    for (int j = 0; j < m; ++j) out.values[j] = y[j];
  } else {
    out.values[0] = alpha.values[0];
    for (int j = 1; j < m; ++j) out.values[j] = y[j] / (static_cast<double>(j) * j);
  }
  return out;
}

CompactCoeffs shen_forward(const PhysicalField& field, const BoundaryCondition& bc) {
  return compact_forward_recursive(cheb_forward(field), bc);
}

PhysicalField shen_backward(const CompactCoeffs& beta, const BoundaryCondition& bc) {
  return cheb_backward(compact_backward(beta, bc));
}

}  // namespace opno
