#pragma once

#include <span>
#include <string>
#include <vector>

#include "opno/compacting.hpp"
#include "opno/container.hpp"
#include "opno/dataset.hpp"
#include "opno/model.hpp"

namespace opno {

/// Max over both ends of |a u(+-1) + b u'(+-1)|, evaluated exactly from the
/// Chebyshev coefficients of the grid values.
double boundary_error_spectral(std::span<const double> values, const BoundaryCondition& bc);

/// One-sided difference quotients at both ends with the local CGL spacing:
/// max(|u_1 - u_0| / (x_1 - x_0), |u_N - u_{N-1}| / (x_N - x_{N-1})).
double boundary_error_fd(std::span<const double> values);

struct ResolutionMetrics {
  int degree = 0;
  int samples = 0;
  double mean_rel_l2 = 0.0;
  double bc_spectral_max = 0.0;
  double bc_fd_max = 0.0;
  double seconds = 0.0;
};

/// Resamples the test split to `degree` spectrally, evaluates the model and
/// compares with the identically resampled reference outputs.
ResolutionMetrics evaluate_at_resolution(const ModelParams& params, const Dataset& data,
                                         int degree, int threads = 1);

struct BenchReport {
  std::vector<ResolutionMetrics> rows;  // sorted by degree

  std::string to_text() const;
  Container to_container() const;
};

/// One row per degree (sorted, duplicates removed). Throws DataError on an
/// empty test split.
BenchReport bench_table(const ModelParams& params, const Dataset& data,
                        std::vector<int> degrees = {256, 1024, 4096}, int threads = 1);

}  // namespace opno
