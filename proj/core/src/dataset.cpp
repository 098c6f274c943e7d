#include "opno/dataset.hpp"

#include <json.hpp>

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "opno/compacting.hpp"
#include "opno/error.hpp"

namespace opno {
namespace {

Matrix matrix_from(const NamedArray& a, std::size_t cols) {
  if (a.shape.size() != 2 || a.shape[1] != cols) {
    throw DataError("array '" + a.name + "' has unexpected shape");
  }
  Matrix m(static_cast<Eigen::Index>(a.shape[0]), static_cast<Eigen::Index>(cols));
  std::copy(a.data.begin(), a.data.end(), m.data());
  return m;
}

void add_matrix(Container& c, const std::string& name, const Matrix& m) {
  c.add(name, {static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols())},
        std::vector<double>(m.data(), m.data() + m.size()));
}

Matrix resample_rows(const Matrix& m, int degree) {
  Matrix out(m.rows(), degree + 1);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const auto v = resample({m.row(r).data(), static_cast<std::size_t>(m.cols())}, degree);
    std::copy(v.begin(), v.end(), out.row(r).data());
  }
  return out;
}

}  // namespace

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (int i = t; i < count; i += threads) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

void Dataset::validate() const {
  const auto cols = static_cast<Eigen::Index>(x.size());
  if (x.size() < 3) throw DataError("dataset grid has fewer than 3 points");
  if (train_in.cols() != cols || train_out.cols() != cols || test_in.cols() != cols ||
      test_out.cols() != cols) {
    throw DataError("dataset arrays do not match the grid size");
  }
  if (train_in.rows() != train_out.rows() || test_in.rows() != test_out.rows()) {
    throw DataError("dataset input/output sample counts differ");
  }
  for (const Matrix* m : {&train_in, &train_out, &test_in, &test_out}) {
    if (!m->allFinite()) throw DataError("dataset contains non-finite values");
  }
}

Dataset build_dataset(const BuildOptions& options) {
  if (options.n_train < 0 || options.n_test < 0 || options.index_offset < 0) {
    throw InvalidArgument("sample counts and index offset must be >= 0");
  }
  if (options.degree < 4) throw InvalidArgument("resolution must be >= 4");
  const int n = options.degree;
  const BurgersSolver solver(options.problem, n);
  const auto& fct = ChebyshevTransform::get(n);
  const CompactBasis& basis = CompactBasis::get(BoundaryCondition::neumann(), n);

  const int total = options.n_train + options.n_test;
  Matrix inputs(total, n + 1), outputs(total, n + 1);
  std::atomic<int> done{0};
  std::mutex progress_mutex;
  parallel_for(total, options.threads, [&](int i) {
    auto rng = sample_rng(options.seed, static_cast<std::uint64_t>(options.index_offset) + i);
    PhysicalField u0 = sample_grf(options.grf, n, rng);
    // Shen round trip pins u0'(+-1) = 0 to roundoff.
    std::vector<double> alpha(n + 1), beta(n - 1);
    fct.forward(u0.values, alpha);
    basis.forward(alpha, beta);
    basis.backward(beta, alpha);
    fct.backward(alpha, u0.values);
    std::vector<double> u1;
    try {
      u1 = solver.solve(u0.values);
    } catch (const NumericError& e) {
      throw NumericError("sample " + std::to_string(i) + ": " + e.what());
    }
    std::copy(u0.values.begin(), u0.values.end(), inputs.row(i).data());
    std::copy(u1.begin(), u1.end(), outputs.row(i).data());
    const int finished = ++done;
    if (options.progress) {
      std::lock_guard lock(progress_mutex);
      options.progress(finished, total);
    }
  });

  Dataset data;
  data.x = cgl_grid(n).nodes;
  data.train_in = inputs.topRows(options.n_train);
  data.train_out = outputs.topRows(options.n_train);
  data.test_in = inputs.bottomRows(options.n_test);
  data.test_out = outputs.bottomRows(options.n_test);
  data.meta.nu = options.problem.nu;
  data.meta.degree = n;
  data.meta.dt = solver.dt();
  data.meta.seed = options.seed;
  data.meta.grf_cutoff = options.grf.effective_cutoff(n);
  data.meta.bc = "neumann";
  data.validate();
  return data;
}

Container dataset_to_container(const Dataset& data) {
  Container c;
  c.add("x", {data.x.size()}, data.x);
  add_matrix(c, "train_in", data.train_in);
  add_matrix(c, "train_out", data.train_out);
  add_matrix(c, "test_in", data.test_in);
  add_matrix(c, "test_out", data.test_out);
  nlohmann::json meta = {
      {"kind", "dataset"},
      {"nu", data.meta.nu},
      {"N", data.meta.degree},
      {"dt", data.meta.dt},
      {"seed", data.meta.seed},
      {"grf_cutoff", data.meta.grf_cutoff},
      {"bc", data.meta.bc},
      {"n_train", data.n_train()},
      {"n_test", data.n_test()},
  };
  c.metadata = meta.dump();
  return c;
}

Dataset dataset_from_container(const Container& c) {
  Dataset d;
  d.x = c.get("x").data;
  const std::size_t cols = d.x.size();
  d.train_in = matrix_from(c.get("train_in"), cols);
  d.train_out = matrix_from(c.get("train_out"), cols);
  d.test_in = matrix_from(c.get("test_in"), cols);
  d.test_out = matrix_from(c.get("test_out"), cols);
  try {
    const auto meta = nlohmann::json::parse(c.metadata);
    d.meta.nu = meta.value("nu", d.meta.nu);
    d.meta.degree = meta.value("N", static_cast<int>(cols) - 1);
    d.meta.dt = meta.value("dt", 0.0);
    d.meta.seed = meta.value("seed", std::uint64_t{0});
    d.meta.grf_cutoff = meta.value("grf_cutoff", 0);
    d.meta.bc = meta.value("bc", std::string("neumann"));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("dataset metadata is not valid JSON: ") + e.what());
  }
  d.validate();
  return d;
}

void save_dataset(const std::filesystem::path& path, const Dataset& data) {
  write_container(path, dataset_to_container(data));
}

Dataset load_dataset(const std::filesystem::path& path) {
  return dataset_from_container(read_container(path));
}

Dataset resample_dataset(const Dataset& data, int degree) {
  if (degree == data.degree()) return data;
  Dataset out;
  out.x = cgl_grid(degree).nodes;
  out.train_in = resample_rows(data.train_in, degree);
  out.train_out = resample_rows(data.train_out, degree);
  out.test_in = resample_rows(data.test_in, degree);
  out.test_out = resample_rows(data.test_out, degree);
  out.meta = data.meta;
  out.meta.degree = degree;
  return out;
}

}  // namespace opno
