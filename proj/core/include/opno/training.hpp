#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "opno/container.hpp"
#include "opno/dataset.hpp"
#include "opno/model.hpp"

namespace opno {

struct TrainConfig {
  int epochs = 5000;
  int batch_size = 20;
  double lr0 = 1e-3;
  int halve_every = 500;
  std::uint64_t seed = 0;
  /// Test loss is evaluated every `test_every` epochs and after the last one.
  int test_every = 50;
  int threads = 1;

  /// Reduced profile: 500 epochs, otherwise paper defaults.
  static TrainConfig desk();
  /// Throws InvalidArgument on bad values.
  void validate() const;
};

struct AdamState {
  static constexpr double beta1 = 0.9;
  static constexpr double beta2 = 0.999;
  static constexpr double eps = 1e-8;

  std::vector<double> m, v;
  std::int64_t step = 0;

  AdamState() = default;
  explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

/// One bias-corrected Adam update in place. Throws InvalidArgument on size
/// mismatch.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               double lr);

/// lr0 * 2^-floor(epoch / halve_every).
double lr_schedule(int epoch, const TrainConfig& config);

/// ||pred - ref||_2 / ||ref||_2 over grid values. Throws InvalidArgument if
/// ref is zero or sizes differ.
double relative_l2(std::span<const double> pred, std::span<const double> ref);

struct EpochRecord {
  int epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  /// NaN when the test split was not evaluated this epoch.
  double test_loss = 0.0;
};

struct TrainState {
  ModelParams params;
  AdamState adam;
  /// Number of completed epochs.
  int epoch = 0;
  std::vector<EpochRecord> history;
};

using TrainCallback = std::function<void(const EpochRecord&)>;

/// Fresh state: init_params(config, seed) and zero moments.
TrainState initial_state(const ModelConfig& model, std::uint64_t seed);

/// Runs epochs state.epoch .. config.epochs - 1 of minibatch Adam on the mean
/// per-sample relative L2 loss. The shuffle of each epoch is seeded from
/// (seed, epoch), so a resumed run follows the same trajectory as an
/// uninterrupted one. Gradients are reduced in sample order regardless of
/// thread count. Throws NumericError if the loss becomes non-finite.
void train(TrainState& state, const Dataset& data, const TrainConfig& config,
           const TrainCallback& on_epoch = {});

/// Mean relative L2 of the model over (inputs, outputs) rows.
double mean_relative_l2(const ModelParams& params, const Matrix& inputs, const Matrix& outputs,
                        int threads = 1);

/// Relative L2 loss and its gradient with respect to `pred`.
double relative_l2_with_grad(std::span<const double> pred, std::span<const double> ref,
                             std::span<double> grad);

struct GradcheckReport {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::string worst_param;
  double input_max_rel_error = 0.0;
};

/// Central-difference check of model_backward on a random input and random
/// target, for every parameter (or a deterministic sample of `max_params`
/// of them when nonzero). The relative error of one entry is
/// |fd - an| / max(|fd|, |an|, floor) where floor = 1e-6 * max|an|.
GradcheckReport gradcheck(const ModelConfig& config, int degree, std::uint64_t seed,
                          double step = 1e-6, std::size_t max_params = 0);

// --- checkpoints ----------------------------------------------------------

Container checkpoint_to_container(const TrainState& state, const TrainConfig& train);
/// Restores parameters, moments and history. `train` (optional) receives the
/// stored training configuration.
TrainState checkpoint_from_container(const Container& c, TrainConfig* train = nullptr);
void save_checkpoint(const std::filesystem::path& path, const TrainState& state,
                     const TrainConfig& train);
TrainState load_checkpoint(const std::filesystem::path& path, TrainConfig* train = nullptr);

/// JSON round trip of the model configuration.
std::string model_config_to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const std::string& text);

}  // namespace opno
