// opno: data generation, training, evaluation, self-test and plotting.
//
// Exit codes: 0 success, 1 usage, 2 data error, 3 numeric failure.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "opno/burgers.hpp"
#include "opno/dataset.hpp"
#include "opno/error.hpp"
#include "opno/evaluation.hpp"
#include "opno/training.hpp"
#include "plot.hpp"
#include "selftest.hpp"

namespace {

using namespace opno;
namespace fs = std::filesystem;

constexpr int kExitUsage = 1, kExitData = 2, kExitNumeric = 3;

struct GenArgs {
  bool desk = false;
  int n_train = 1000, n_test = 100, resolution = 1024;
  double nu = BurgersProblem{}.nu;  // 0.1 / pi
  std::uint64_t seed = 0;
  int grf_cutoff = 0;
  double dt = 0.0;
  std::string out;
  int threads = 1;
};

struct TrainArgs {
  bool desk = false;
  std::string data, bc = "neumann", checkpoint, resume;
  int layers = 4, width = 50, modes = 40, bandwidth = 3;
  int epochs = 5000, halve_every = 500, batch = 20, test_every = 50, save_every = 50;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct EvalArgs {
  std::string checkpoint, data, out;
  std::vector<int> resolutions{256, 1024, 4096};
  bool regenerate = false;
  int threads = 1;
};

struct PlotArgs {
  std::string checkpoint, data, out_dir = ".", split = "test";
  std::vector<int> indices{0};
};

struct SelftestArgs {
  bool quick = false;
  std::uint64_t seed = 0;
};

int cmd_gen_data(GenArgs a, const CLI::App& sub) {
  if (a.desk) {
    if (sub.count("--n-train") == 0) a.n_train = 200;
    if (sub.count("--n-test") == 0) a.n_test = 50;
    if (sub.count("--resolution") == 0) a.resolution = 256;
  }
  BuildOptions o;
  o.n_train = a.n_train;
  o.n_test = a.n_test;
  o.degree = a.resolution;
  o.problem.nu = a.nu;
  o.problem.dt = a.dt;
  o.grf.cutoff = a.grf_cutoff;
  o.seed = a.seed;
  o.threads = a.threads;
  const int total = a.n_train + a.n_test;
  o.progress = [total](int done, int) {
    if (done % 10 == 0 || done == total) std::fprintf(stderr, "generated %d/%d\n", done, total);
  };
  const Dataset data = build_dataset(o);
  save_dataset(a.out, data);
  std::printf("wrote %s: %d train / %d test samples, N=%d, dt=%.6g, grf_cutoff=%d\n",
              a.out.c_str(), data.n_train(), data.n_test(), data.degree(), data.meta.dt,
              data.meta.grf_cutoff);
  return 0;
}

int cmd_train(TrainArgs a, const CLI::App& sub) {
  if (a.desk && sub.count("--epochs") == 0) a.epochs = 500;
  const Dataset data = load_dataset(a.data);

  TrainConfig tc;
  tc.epochs = a.epochs;
  tc.batch_size = a.batch;
  tc.lr0 = a.lr;
  tc.halve_every = a.halve_every;
  tc.seed = a.seed;
  tc.test_every = a.test_every;
  tc.threads = a.threads;
  tc.validate();

  TrainState state;
  if (!a.resume.empty()) {
    state = load_checkpoint(a.resume);
    std::fprintf(stderr, "resuming from %s at epoch %d\n", a.resume.c_str(), state.epoch);
  } else {
    ModelConfig mc;
    mc.layers = a.layers;
    mc.width = a.width;
    mc.modes = a.modes;
    mc.bandwidth = a.bandwidth;
    mc.bc = BoundaryCondition::parse(a.bc);
    mc.validate_for_degree(data.degree());
    state = initial_state(mc, a.seed);
  }
  const std::string model_bc = state.params.config().bc.to_string();
  if (model_bc != data.meta.bc) {
    std::fprintf(stderr, "warning: model bc '%s' differs from dataset bc '%s'\n",
                 model_bc.c_str(), data.meta.bc.c_str());
  }

  train(state, data, tc, [&](const EpochRecord& r) {
    if (std::isnan(r.test_loss)) {
      std::printf("epoch=%d lr=%.6g train_loss=%.6e\n", r.epoch, r.lr, r.train_loss);
    } else {
      std::printf("epoch=%d lr=%.6g train_loss=%.6e test_loss=%.6e\n", r.epoch, r.lr,
                  r.train_loss, r.test_loss);
    }
    std::fflush(stdout);
    if (!a.checkpoint.empty() && a.save_every > 0 && state.epoch % a.save_every == 0) {
      save_checkpoint(a.checkpoint, state, tc);
    }
  });
  if (!a.checkpoint.empty()) {
    save_checkpoint(a.checkpoint, state, tc);
    std::printf("wrote %s at epoch %d\n", a.checkpoint.c_str(), state.epoch);
  }
  return 0;
}

int cmd_eval(const EvalArgs& a) {
  if (!fs::exists(a.checkpoint)) throw DataError("checkpoint not found: " + a.checkpoint);
  const TrainState state = load_checkpoint(a.checkpoint);
  const Dataset data = load_dataset(a.data);
  BenchReport report;
  if (a.regenerate) {
    // Fresh reference solutions per resolution from the dataset's own seed
    // and GRF cutoff, so each row sees the same initial functions.
    std::vector<int> degrees = a.resolutions;
    std::sort(degrees.begin(), degrees.end());
    degrees.erase(std::unique(degrees.begin(), degrees.end()), degrees.end());
    for (int n : degrees) {
      BuildOptions o;
      o.n_train = 0;
      o.n_test = data.n_test();
      o.degree = n;
      o.problem.nu = data.meta.nu;
      o.grf.cutoff = data.meta.grf_cutoff;
      o.seed = data.meta.seed;
      o.index_offset = data.n_train();
      o.threads = a.threads;
      const Dataset fresh = build_dataset(o);
      report.rows.push_back(evaluate_at_resolution(state.params, fresh, n, a.threads));
    }
  } else {
    report = bench_table(state.params, data, a.resolutions, a.threads);
  }
  const std::string text = report.to_text();
  std::fputs(text.c_str(), stdout);
  if (!a.out.empty()) {
    write_container(a.out, report.to_container());
    std::ofstream(a.out + ".txt") << text;
    std::printf("wrote %s and %s.txt\n", a.out.c_str(), a.out.c_str());
  }
  return 0;
}

int cmd_selftest(const SelftestArgs& a) {
  const auto results = tools::run_selftest(a.quick, a.seed);
  int failed = 0;
  for (const auto& r : results) {
    std::printf("%-4s %-36s value=%.3e tol=%.1e\n", r.passed ? "PASS" : "FAIL", r.name.c_str(),
                r.value, r.tolerance);
    if (!r.passed) ++failed;
  }
  std::printf("%zu checks, %d failed\n", results.size(), failed);
  return failed == 0 ? 0 : kExitNumeric;
}

int cmd_plot(const PlotArgs& a) {
  const TrainState state = load_checkpoint(a.checkpoint);
  const Dataset data = load_dataset(a.data);
  const bool test = a.split == "test";
  const Matrix& in = test ? data.test_in : data.train_in;
  const Matrix& out = test ? data.test_out : data.train_out;
  fs::create_directories(a.out_dir);
  for (int i : a.indices) {
    if (i < 0 || i >= in.rows()) {
      throw InvalidArgument("sample index " + std::to_string(i) + " out of range");
    }
    Matrix input(1, in.cols());
    input.row(0) = in.row(i);
    const Matrix pred = model_forward(state.params, input).output;
    const auto cols = static_cast<std::size_t>(in.cols());
    const fs::path stem = fs::path(a.out_dir) / (a.split + "_sample_" + std::to_string(i));
    tools::write_sample_plot(stem, a.split + " sample " + std::to_string(i), data.x,
                             {in.row(i).data(), cols}, {out.row(i).data(), cols},
                             {pred.data(), cols});
    std::printf("wrote %s.svg and %s.csv\n", stem.c_str(), stem.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"OPNO: spectral neural operator toolkit"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen-data", "Generate a Burgers dataset from GRF initial data");
  g->add_flag("--desk", gen.desk, "Desk profile: 200/50 samples at N=256 unless overridden");
  g->add_option("--n-train", gen.n_train, "Training samples")->check(CLI::NonNegativeNumber);
  g->add_option("--n-test", gen.n_test, "Test samples")->check(CLI::NonNegativeNumber);
  g->add_option("--resolution", gen.resolution, "Grid degree N")->check(CLI::Range(4, 1 << 20));
  g->add_option("--nu", gen.nu, "Viscosity (default 0.1/pi)")->check(CLI::PositiveNumber);
  g->add_option("--seed", gen.seed, "Master seed");
  g->add_option("--grf-cutoff", gen.grf_cutoff, "Highest GRF cosine mode (0: N/2)")
      ->check(CLI::NonNegativeNumber);
  g->add_option("--dt", gen.dt, "Solver time step (0: default for N)")
      ->check(CLI::NonNegativeNumber);
  g->add_option("--out", gen.out, "Output dataset file")->required();
  g->add_option("--threads", gen.threads, "Worker threads")->check(CLI::PositiveNumber);

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train an OPNO model");
  t->add_flag("--desk", tr.desk, "Desk profile: 500 epochs unless overridden");
  t->add_option("--data", tr.data, "Dataset file")->required();
  t->add_option("--bc", tr.bc, "dirichlet | neumann | robin:a-,b-,a+,b+");
  t->add_option("--layers", tr.layers, "OPNO layers")->check(CLI::PositiveNumber);
  t->add_option("--width", tr.width, "Hidden channels")->check(CLI::PositiveNumber);
  t->add_option("--modes", tr.modes, "Retained compact modes")->check(CLI::PositiveNumber);
  t->add_option("--bandwidth", tr.bandwidth, "Odd spectral bandwidth")->check(CLI::PositiveNumber);
  t->add_option("--epochs", tr.epochs, "Total epochs")->check(CLI::NonNegativeNumber);
  t->add_option("--lr", tr.lr, "Initial learning rate")->check(CLI::PositiveNumber);
  t->add_option("--halve-every", tr.halve_every, "Epochs per learning-rate halving")
      ->check(CLI::PositiveNumber);
  t->add_option("--batch", tr.batch, "Minibatch size")->check(CLI::PositiveNumber);
  t->add_option("--test-every", tr.test_every, "Epochs between test evaluations")
      ->check(CLI::PositiveNumber);
  t->add_option("--save-every", tr.save_every, "Epochs between checkpoint writes (0: end only)")
      ->check(CLI::NonNegativeNumber);
  t->add_option("--seed", tr.seed, "Seed for initialization and shuffling");
  t->add_option("--checkpoint", tr.checkpoint, "Checkpoint file to write");
  t->add_option("--resume", tr.resume, "Checkpoint to continue from")->check(CLI::ExistingFile);
  t->add_option("--threads", tr.threads, "Worker threads")->check(CLI::PositiveNumber);

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Evaluate a checkpoint across resolutions");
  e->add_option("--checkpoint", ev.checkpoint, "Checkpoint file")->required();
  e->add_option("--data", ev.data, "Dataset file")->required();
  e->add_option("--resolutions", ev.resolutions, "Comma-separated grid degrees")
      ->delimiter(',')
      ->check(CLI::Range(2, 1 << 20));
  e->add_flag("--regenerate", ev.regenerate,
              "Solve fresh references at each resolution instead of resampling");
  e->add_option("--out", ev.out, "Report container (text copy at <out>.txt)");
  e->add_option("--threads", ev.threads, "Worker threads")->check(CLI::PositiveNumber);

  SelftestArgs st;
  auto* s = app.add_subcommand("selftest", "Run the invariant suites");
  s->add_flag("--quick", st.quick, "Reduced sizes");
  s->add_option("--seed", st.seed, "Seed for random test inputs");

  PlotArgs pl;
  auto* p = app.add_subcommand("plot", "Write per-sample SVG plots and CSV curves");
  p->add_option("--checkpoint", pl.checkpoint, "Checkpoint file")->required();
  p->add_option("--data", pl.data, "Dataset file")->required();
  p->add_option("--indices", pl.indices, "Comma-separated sample indices")->delimiter(',');
  p->add_option("--split", pl.split, "test | train")->check(CLI::IsMember({"test", "train"}));
  p->add_option("--out-dir", pl.out_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (g->parsed()) return cmd_gen_data(gen, *g);
    if (t->parsed()) return cmd_train(tr, *t);
    if (e->parsed()) return cmd_eval(ev);
    if (s->parsed()) return cmd_selftest(st);
    if (p->parsed()) return cmd_plot(pl);
  } catch (const InvalidArgument& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return kExitUsage;
  } catch (const DataError& err) {
    std::fprintf(stderr, "data error: %s\n", err.what());
    return kExitData;
  } catch (const fs::filesystem_error& err) {
    std::fprintf(stderr, "data error: %s\n", err.what());
    return kExitData;
  } catch (const NumericError& err) {
    std::fprintf(stderr, "numeric error: %s\n", err.what());
    return kExitNumeric;
  }
  return kExitUsage;
}
