#include "opno/fft.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>

#include "opno/error.hpp"

namespace opno {
namespace {

// FFTW's planner is not thread-safe; execution on distinct arrays is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

RealFft::RealFft(std::size_t length) : length_(length) {
  const int n = static_cast<int>(length);
  std::vector<double> real(length);
  std::vector<std::complex<double>> spec(length / 2 + 1);
  auto* cplx = reinterpret_cast<fftw_complex*>(spec.data());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  forward_plan_ = fftw_plan_dft_r2c_1d(n, real.data(), cplx, flags);
  inverse_plan_ = fftw_plan_dft_c2r_1d(n, cplx, real.data(), flags | FFTW_DESTROY_INPUT);
  if (!forward_plan_ || !inverse_plan_) {
    throw NumericError("fftw plan creation failed for length " + std::to_string(length));
  }
}

RealFft::~RealFft() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
}

const RealFft& RealFft::get(std::size_t length) {
  if (length == 0) throw InvalidArgument("fft length must be positive");
  static std::map<std::size_t, std::unique_ptr<RealFft>> cache;
  std::lock_guard lock(planner_mutex());
  auto it = cache.find(length);
  if (it == cache.end()) {
    it = cache.emplace(length, std::unique_ptr<RealFft>(new RealFft(length))).first;
  }
  return *it->second;
}

void RealFft::forward(std::span<const double> in, std::span<std::complex<double>> out) const {
  if (in.size() != length_ || out.size() != spectrum_size()) {
    throw InvalidArgument("RealFft::forward: size mismatch");
  }
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_), const_cast<double*>(in.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
}

void RealFft::inverse(std::span<const std::complex<double>> in, std::span<double> out) const {
  if (in.size() != spectrum_size() || out.size() != length_) {
    throw InvalidArgument("RealFft::inverse: size mismatch");
  }
  // c2r destroys its input.
  std::vector<std::complex<double>> scratch(in.begin(), in.end());
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_),
                       reinterpret_cast<fftw_complex*>(scratch.data()), out.data());
}

void RealFft::inverse_destructive(std::span<std::complex<double>> in,
                                  std::span<double> out) const {
  if (in.size() != spectrum_size() || out.size() != length_) {
    throw InvalidArgument("RealFft::inverse: size mismatch");
  }
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_),
                       reinterpret_cast<fftw_complex*>(in.data()), out.data());
}

std::vector<double> linear_convolution_fft(std::span<const double> x, std::span<const double> s) {
  if (x.empty() || s.empty()) return {};
  const std::size_t out_len = x.size() + s.size() - 1;
  // Pad both inputs to 2*max(n, m) at their ends.
  const std::size_t padded = 2 * std::max(x.size(), s.size());
  const RealFft& fft = RealFft::get(padded);

  std::vector<double> xp(padded, 0.0), sp(padded, 0.0);
  std::copy(x.begin(), x.end(), xp.begin());
  std::copy(s.begin(), s.end(), sp.begin());
  std::vector<std::complex<double>> xf(fft.spectrum_size()), sf(fft.spectrum_size());
  fft.forward(xp, xf);
  fft.forward(sp, sf);
  for (std::size_t k = 0; k < xf.size(); ++k) xf[k] *= sf[k];
  fft.inverse_destructive(xf, xp);

  std::vector<double> y(out_len);
  const double scale = 1.0 / static_cast<double>(padded);
  for (std::size_t i = 0; i < out_len; ++i) y[i] = xp[i] * scale;
  return y;
}

std::vector<double> linear_convolution_direct(std::span<const double> x,
                                              std::span<const double> s) {
  if (x.empty() || s.empty()) return {};
  std::vector<double> y(x.size() + s.size() - 1, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < s.size(); ++j) y[i + j] += x[i] * s[j];
  }
  return y;
}

}  // namespace opno
