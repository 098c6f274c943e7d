#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace opno {

/// Real-to-complex FFT of a fixed length, backed by FFTW. Plans are created
/// once per length, cached process-wide and immutable afterwards, so a
/// RealFft may be shared between threads.
class RealFft {
 public:
  /// Returns the cached plan pair for `length` (length >= 1).
  static const RealFft& get(std::size_t length);

  std::size_t length() const { return length_; }
  std::size_t spectrum_size() const { return length_ / 2 + 1; }

  /// Unnormalized forward transform; out.size() == spectrum_size().
  void forward(std::span<const double> in, std::span<std::complex<double>> out) const;
  /// Unnormalized inverse (no 1/length factor); in.size() == spectrum_size().
  void inverse(std::span<const std::complex<double>> in, std::span<double> out) const;
  /// As inverse(), but may overwrite `in`. Avoids a copy on hot paths.
  void inverse_destructive(std::span<std::complex<double>> in, std::span<double> out) const;

  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;
  ~RealFft();

 private:
  explicit RealFft(std::size_t length);

  std::size_t length_;
  void* forward_plan_ = nullptr;
  void* inverse_plan_ = nullptr;
};

/// Full linear convolution of x and s (lengths may differ) via zero padding
/// and a real FFT. Output length x.size() + s.size() - 1.
std::vector<double> linear_convolution_fft(std::span<const double> x,
                                           std::span<const double> s);

/// Direct O(n*m) linear convolution.
std::vector<double> linear_convolution_direct(std::span<const double> x,
                                              std::span<const double> s);

}  // namespace opno
