#include "opno/grf.hpp"

#include <cmath>
#include <numbers>

#include "opno/error.hpp"

namespace opno {

double GrfSpec::eigenvalue(int k) {
  const double w = k * std::numbers::pi / 2.0;
  return w * w;
}

double GrfSpec::mode_std(int k) const { return amplitude / (scale * eigenvalue(k) + shift); }

double neumann_eigenfunction(int k, double x) {
  if (k == 0) return 1.0 / std::numbers::sqrt2;
  return std::cos(k * std::numbers::pi * (x + 1.0) / 2.0);
}

PhysicalField sample_grf(const GrfSpec& spec, int degree, std::mt19937_64& rng) {
  const GridSpec grid = cgl_grid(degree);
  const int cutoff = spec.effective_cutoff(degree);
  if (cutoff < 1) throw InvalidArgument("GRF cutoff must be >= 1");
  if (!(spec.scale > 0.0 && spec.shift > 0.0)) {
    throw InvalidArgument("GRF covariance must be positive definite");
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> xi(cutoff + 1);
  for (auto& v : xi) v = normal(rng);

  PhysicalField field;
  field.values.assign(grid.size(), 0.0);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    double u = 0.0;
    for (int k = 0; k <= cutoff; ++k) u += xi[k] * spec.mode_std(k) * neumann_eigenfunction(k, grid.nodes[j]);
    field.values[j] = u;
  }
  return field;
}

std::mt19937_64 sample_rng(std::uint64_t master_seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                    static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    0x4f504e4fu};
  return std::mt19937_64(seq);
}

}  // namespace opno
