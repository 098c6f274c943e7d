#include "opno/evaluation.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

#include "opno/error.hpp"
#include "opno/training.hpp"

namespace opno {

double boundary_error_spectral(std::span<const double> values, const BoundaryCondition& bc) {
  if (values.size() < 2) throw InvalidArgument("boundary_error_spectral: need >= 2 values");
  std::vector<double> coeffs(values.size());
  ChebyshevTransform::get(static_cast<int>(values.size()) - 1).forward(values, coeffs);
  return bc.max_residual(coeffs);
}

double boundary_error_fd(std::span<const double> values) {
  if (values.size() < 2) throw InvalidArgument("boundary_error_fd: need >= 2 values");
  const int n = static_cast<int>(values.size()) - 1;
  const GridSpec grid = cgl_grid(n);
  const auto& x = grid.nodes;
  const double left = std::abs(values[1] - values[0]) / (x[1] - x[0]);
  const double right = std::abs(values[n] - values[n - 1]) / (x[n] - x[n - 1]);
  return std::max(left, right);
}

ResolutionMetrics evaluate_at_resolution(const ModelParams& params, const Dataset& data,
                                         int degree, int threads) {
  params.config().validate_for_degree(degree);
  if (data.n_test() == 0) throw DataError("dataset has no test samples");
  const auto start = std::chrono::steady_clock::now();
  const int count = data.n_test();
  std::vector<double> l2(count), bc_spec(count), bc_fd(count);
  const BoundaryCondition& bc = params.config().bc;
  const bool same = degree == data.degree();
  parallel_for(count, threads, [&](int i) {
    const std::span<const double> in_row{data.test_in.row(i).data(), data.x.size()};
    const std::span<const double> out_row{data.test_out.row(i).data(), data.x.size()};
    const std::vector<double> in = same ? std::vector<double>(in_row.begin(), in_row.end())
                                        : resample(in_row, degree);
    const std::vector<double> ref = same ? std::vector<double>(out_row.begin(), out_row.end())
                                         : resample(out_row, degree);
    Matrix input(1, degree + 1);
    std::copy(in.begin(), in.end(), input.data());
    const Matrix pred = model_forward(params, input).output;
    const std::span<const double> p{pred.data(), static_cast<std::size_t>(pred.cols())};
    l2[i] = relative_l2(p, ref);
    bc_spec[i] = boundary_error_spectral(p, bc);
    bc_fd[i] = boundary_error_fd(p);
  });
  ResolutionMetrics m;
  m.degree = degree;
  m.samples = count;
  for (int i = 0; i < count; ++i) {
    m.mean_rel_l2 += l2[i];
    m.bc_spectral_max = std::max(m.bc_spectral_max, bc_spec[i]);
    m.bc_fd_max = std::max(m.bc_fd_max, bc_fd[i]);
  }
  m.mean_rel_l2 /= count;
  m.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return m;
}

BenchReport bench_table(const ModelParams& params, const Dataset& data, std::vector<int> degrees,
                        int threads) {
  if (data.n_test() == 0) throw DataError("dataset has no test samples");
  if (degrees.empty()) throw InvalidArgument("bench_table: no resolutions requested");
  std::sort(degrees.begin(), degrees.end());
  degrees.erase(std::unique(degrees.begin(), degrees.end()), degrees.end());
  BenchReport report;
  for (int n : degrees) report.rows.push_back(evaluate_at_resolution(params, data, n, threads));
  return report;
}

std::string BenchReport::to_text() const {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%8s  %8s  %14s  %16s  %16s  %9s\n", "N", "samples",
                "rel L2 (mean)", "b.c. spectral", "b.c. fd", "seconds");
  out += line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%8d  %8d  %14.6e  %16.6e  %16.6e  %9.3f\n", r.degree,
                  r.samples, r.mean_rel_l2, r.bc_spectral_max, r.bc_fd_max, r.seconds);
    out += line;
  }
  return out;
}

Container BenchReport::to_container() const {
  Container c;
  std::vector<double> n, samples, l2, spec, fd, secs;
  for (const auto& r : rows) {
    n.push_back(r.degree);
    samples.push_back(r.samples);
    l2.push_back(r.mean_rel_l2);
    spec.push_back(r.bc_spectral_max);
    fd.push_back(r.bc_fd_max);
    secs.push_back(r.seconds);
  }
  const std::uint64_t len = rows.size();
  c.add("N", {len}, n);
  c.add("samples", {len}, samples);
  c.add("rel_l2", {len}, l2);
  c.add("bc_spectral", {len}, spec);
  c.add("bc_fd", {len}, fd);
  c.add("seconds", {len}, secs);
  c.metadata = nlohmann::json{{"kind", "bench_report"}, {"rows", rows.size()}}.dump();
  return c;
}

}  // namespace opno
