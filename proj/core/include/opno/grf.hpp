#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "opno/chebyshev.hpp"

namespace opno {

/// Gaussian random field N(0, amplitude^2 (-scale*Laplacian + shift*I)^-2)
/// on [-1, 1] with Neumann boundary conditions, realized by its cosine
/// eigen-expansion truncated at `cutoff` modes.
struct GrfSpec {
  double amplitude = 25.0;
  double scale = 4.0;
  double shift = 25.0;
  /// Highest cosine mode kept; 0 selects degree / 2.
  int cutoff = 0;

  int effective_cutoff(int degree) const { return cutoff > 0 ? cutoff : degree / 2; }
  /// Neumann Laplacian eigenvalue (k pi / 2)^2.
  static double eigenvalue(int k);
  /// Standard deviation of mode k: amplitude / (scale * lambda_k + shift).
  double mode_std(int k) const;
};

/// Orthonormal Neumann eigenfunction on [-1, 1]: 1/sqrt(2) for k = 0,
/// cos(k pi (x + 1) / 2) otherwise.
double neumann_eigenfunction(int k, double x);

/// One draw sampled on the CGL grid of `degree`.
PhysicalField sample_grf(const GrfSpec& spec, int degree, std::mt19937_64& rng);

/// Per-sample generator derived from a master seed and a sample index, so
/// samples can be generated in any order.
std::mt19937_64 sample_rng(std::uint64_t master_seed, std::uint64_t index);

}  // namespace opno
