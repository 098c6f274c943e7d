#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "opno/burgers.hpp"
#include "opno/container.hpp"
#include "opno/grf.hpp"
#include "opno/model.hpp"

namespace opno {

struct DatasetMeta {
  double nu = 0.1 / std::numbers::pi;
  int degree = 0;
  double dt = 0.0;
  std::uint64_t seed = 0;
  int grf_cutoff = 0;
  std::string bc = "neumann";
};

/// Input/output pairs on one CGL grid. Each matrix holds one sample per row.
struct Dataset {
  std::vector<double> x;
  Matrix train_in, train_out, test_in, test_out;
  DatasetMeta meta;

  int degree() const { return static_cast<int>(x.size()) - 1; }
  int n_train() const { return static_cast<int>(train_in.rows()); }
  int n_test() const { return static_cast<int>(test_in.rows()); }
  /// Throws DataError on inconsistent shapes or non-finite values.
  void validate() const;
};

struct BuildOptions {
  int n_train = 200;
  int n_test = 50;
  int degree = 256;
  GrfSpec grf;
  BurgersProblem problem;
  std::uint64_t seed = 0;
  int threads = 1;
  /// Sample i draws from sample_rng(seed, index_offset + i). A test split
  /// regenerated at another resolution uses index_offset = n_train.
  int index_offset = 0;
  /// Called after each finished sample with (done, total).
  std::function<void(int, int)> progress;
};

/// Generates GRF initial data, projects it onto the Neumann basis and solves
/// Burgers to the final time. Sample i (train first, then test) uses
/// sample_rng(seed, index_offset + i), so the result is independent of thread
/// count and a fixed GRF cutoff yields the same functions at any resolution.
Dataset build_dataset(const BuildOptions& options);

Container dataset_to_container(const Dataset& data);
Dataset dataset_from_container(const Container& c);
void save_dataset(const std::filesystem::path& path, const Dataset& data);
Dataset load_dataset(const std::filesystem::path& path);

/// Spectrally resamples every sample onto the grid of `degree`.
Dataset resample_dataset(const Dataset& data, int degree);

/// Runs `fn(i)` for i in [0, count) on up to `threads` workers. Work is
/// statically interleaved; callers write results to per-index slots.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

}  // namespace opno
