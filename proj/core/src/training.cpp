#include "opno/training.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "opno/error.hpp"

namespace opno {
namespace {

using nlohmann::json;

Matrix row_as_matrix(const Matrix& m, Eigen::Index r) {
  Matrix out(1, m.cols());
  out.row(0) = m.row(r);
  return out;
}

std::span<const double> row_span(const Matrix& m, Eigen::Index r) {
  return {m.row(r).data(), static_cast<std::size_t>(m.cols())};
}

std::mt19937_64 epoch_rng(std::uint64_t seed, int epoch) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(epoch), 0x53485546u};
  return std::mt19937_64(seq);
}

// Fisher-Yates with an explicit modulo-free draw so the permutation does not
// depend on the standard library's distribution implementation.
std::vector<int> permutation(int n, std::mt19937_64& rng) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = n - 1; i > 0; --i) {
    const auto bound = static_cast<std::uint64_t>(i) + 1;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t r;
    do {
      r = rng();
    } while (r >= limit);
    std::swap(idx[i], idx[static_cast<int>(r % bound)]);
  }
  return idx;
}

}  // namespace

TrainConfig TrainConfig::desk() {
  TrainConfig c;
  c.epochs = 500;
  return c;
}

void TrainConfig::validate() const {
  if (epochs < 0) throw InvalidArgument("epochs must be >= 0");
  if (batch_size < 1) throw InvalidArgument("batch size must be >= 1");
  if (!(lr0 > 0.0) || !std::isfinite(lr0)) throw InvalidArgument("learning rate must be > 0");
  if (halve_every < 1) throw InvalidArgument("halve_every must be >= 1");
  if (test_every < 1) throw InvalidArgument("test_every must be >= 1");
  if (threads < 1) throw InvalidArgument("threads must be >= 1");
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               double lr) {
  if (grads.size() != params.size() || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    throw InvalidArgument("adam_step: parameter, gradient and moment sizes differ");
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(AdamState::beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(AdamState::beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = AdamState::beta1 * state.m[i] + (1.0 - AdamState::beta1) * g;
    state.v[i] = AdamState::beta2 * state.v[i] + (1.0 - AdamState::beta2) * g * g;
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + AdamState::eps);
  }
}

double lr_schedule(int epoch, const TrainConfig& config) {
  if (epoch < 0) throw InvalidArgument("lr_schedule: negative epoch");
  return std::ldexp(config.lr0, -(epoch / config.halve_every));
}

double relative_l2(std::span<const double> pred, std::span<const double> ref) {
  if (pred.size() != ref.size()) throw InvalidArgument("relative_l2: size mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const double e = pred[i] - ref[i];
    num += e * e;
    den += ref[i] * ref[i];
  }
  if (den == 0.0) throw InvalidArgument("relative_l2: reference has zero norm");
  return std::sqrt(num / den);
}

double relative_l2_with_grad(std::span<const double> pred, std::span<const double> ref,
                             std::span<double> grad) {
  if (grad.size() != pred.size()) throw InvalidArgument("relative_l2: gradient size mismatch");
  const double loss = relative_l2(pred, ref);
  double den = 0.0;
  for (double r : ref) den += r * r;
  const double ref_norm = std::sqrt(den);
  const double err_norm = loss * ref_norm;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    grad[i] = err_norm > 0.0 ? (pred[i] - ref[i]) / (err_norm * ref_norm) : 0.0;
  }
  return loss;
}

TrainState initial_state(const ModelConfig& model, std::uint64_t seed) {
  TrainState s;
  s.params = init_params(model, seed);
  s.adam = AdamState(s.params.size());
  return s;
}

double mean_relative_l2(const ModelParams& params, const Matrix& inputs, const Matrix& outputs,
                        int threads) {
  const int count = static_cast<int>(inputs.rows());
  if (count == 0) throw DataError("cannot evaluate on an empty split");
  std::vector<double> losses(count);
  parallel_for(count, threads, [&](int i) {
    const Matrix pred = model_forward(params, row_as_matrix(inputs, i)).output;
    losses[i] = relative_l2(row_span(pred, 0), row_span(outputs, i));
  });
  double sum = 0.0;
  for (double l : losses) sum += l;
  return sum / count;
}

void train(TrainState& state, const Dataset& data, const TrainConfig& config,
           const TrainCallback& on_epoch) {
  config.validate();
  data.validate();
  const ModelConfig& model = state.params.config();
  model.validate_for_degree(data.degree());
  if (data.n_train() == 0) throw DataError("dataset has no training samples");
  if (model.input_channels != 1 || model.output_channels != 1) {
    throw InvalidArgument("datasets carry one channel; model must map 1 -> 1 channels");
  }
  if (state.adam.m.size() != state.params.size()) state.adam = AdamState(state.params.size());

  const int n_train = data.n_train();
  const int workers = std::max(1, std::min(config.threads, config.batch_size));
  // One gradient buffer per concurrently processed sample. Each buffer starts
  // from zero and is folded into `grads` in sample order, so the sum does not
  // depend on the number of workers.
  std::vector<ModelParams> sample_grads(workers, ModelParams(model));
  ModelParams grads(model);
  std::vector<double> sample_loss(workers);

  for (int epoch = state.epoch; epoch < config.epochs; ++epoch) {
    const double lr = lr_schedule(epoch, config);
    auto rng = epoch_rng(config.seed, epoch);
    const std::vector<int> order = permutation(n_train, rng);
    double loss_sum = 0.0;

    for (int start = 0; start < n_train; start += config.batch_size) {
      const int batch = std::min(config.batch_size, n_train - start);
      const double scale = 1.0 / batch;
      std::fill(grads.data().begin(), grads.data().end(), 0.0);
      for (int group = 0; group < batch; group += workers) {
        const int members = std::min(workers, batch - group);
        parallel_for(members, members, [&](int slot) {
          const int sample = order[start + group + slot];
          auto& g = sample_grads[slot];
          std::fill(g.data().begin(), g.data().end(), 0.0);
          const ForwardResult fwd =
              model_forward(state.params, row_as_matrix(data.train_in, sample),
                            ForwardMode::training);
          Matrix out_grad(1, fwd.output.cols());
          sample_loss[slot] = relative_l2_with_grad(
              row_span(fwd.output, 0), row_span(data.train_out, sample),
              {out_grad.data(), static_cast<std::size_t>(out_grad.size())});
          model_backward_accumulate(state.params, *fwd.tape, out_grad, g, scale);
        });
        for (int slot = 0; slot < members; ++slot) {
          auto& total = grads.data();
          const auto& g = sample_grads[slot].data();
          for (std::size_t i = 0; i < total.size(); ++i) total[i] += g[i];
          loss_sum += sample_loss[slot];
        }
      }
      adam_step(state.params.data(), grads.data(), state.adam, lr);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = lr;
    rec.train_loss = loss_sum / n_train;
    rec.test_loss = std::numeric_limits<double>::quiet_NaN();
    if (!std::isfinite(rec.train_loss)) {
      throw NumericError("training diverged: non-finite loss at epoch " + std::to_string(epoch));
    }
    const bool last = epoch + 1 == config.epochs;
    if (data.n_test() > 0 && ((epoch + 1) % config.test_every == 0 || last)) {
      rec.test_loss = mean_relative_l2(state.params, data.test_in, data.test_out, config.threads);
      if (!std::isfinite(rec.test_loss)) {
        throw NumericError("training diverged: non-finite test loss at epoch " +
                           std::to_string(epoch));
      }
    }
    state.history.push_back(rec);
    state.epoch = epoch + 1;
    if (on_epoch) on_epoch(rec);
  }
}

GradcheckReport gradcheck(const ModelConfig& config, int degree, std::uint64_t seed, double step,
                          std::size_t max_params) {
  config.validate_for_degree(degree);
  ModelParams params = init_params(config, seed);
  // Nonzero biases so their gradients are exercised away from the origin.
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::uniform_real_distribution<double> unif(-0.5, 0.5);
  for (const auto& b : params.blocks()) {
    if (b.name.find("bias") == std::string::npos) continue;
    for (std::size_t i = 0; i < b.size; ++i) params.data()[b.offset + i] = unif(rng);
  }
  const GridSpec grid = cgl_grid(degree);
  Matrix input(config.input_channels, degree + 1), target(config.output_channels, degree + 1);
  for (Eigen::Index c = 0; c < input.rows(); ++c) {
    const double a = unif(rng), b = unif(rng), f = 1.0 + 2.0 * (unif(rng) + 0.5);
    for (int j = 0; j <= degree; ++j) input(c, j) = a + b * std::sin(f * grid.nodes[j]);
  }
  for (Eigen::Index i = 0; i < target.size(); ++i) target.data()[i] = unif(rng);

  auto loss_of = [&](const ModelParams& p, const Matrix& in) {
    const Matrix out = model_forward(p, in).output;
    return relative_l2({out.data(), static_cast<std::size_t>(out.size())},
                       {target.data(), static_cast<std::size_t>(target.size())});
  };

  const ForwardResult fwd = model_forward(params, input, ForwardMode::training);
  Matrix out_grad(fwd.output.rows(), fwd.output.cols());
  relative_l2_with_grad({fwd.output.data(), static_cast<std::size_t>(fwd.output.size())},
                        {target.data(), static_cast<std::size_t>(target.size())},
                        {out_grad.data(), static_cast<std::size_t>(out_grad.size())});
  const BackwardResult bwd = model_backward(params, *fwd.tape, out_grad);
  const auto& an = bwd.grads.data();

  std::vector<std::size_t> indices(params.size());
  std::iota(indices.begin(), indices.end(), std::size_t{0});
  if (max_params > 0 && max_params < indices.size()) {
    std::mt19937_64 pick(seed + 1);
    std::shuffle(indices.begin(), indices.end(), pick);
    indices.resize(max_params);
    std::sort(indices.begin(), indices.end());
  }
  double an_max = 0.0;
  for (double g : an) an_max = std::max(an_max, std::abs(g));
  const double floor = std::max(1e-3 * an_max, 1e-12);

  GradcheckReport report;
  ModelParams probe = params;
  for (std::size_t i : indices) {
    const double orig = probe.data()[i];
    probe.data()[i] = orig + step;
    const double lp = loss_of(probe, input);
    probe.data()[i] = orig - step;
    const double lm = loss_of(probe, input);
    probe.data()[i] = orig;
    const double fd = (lp - lm) / (2.0 * step);
    const double err = std::abs(fd - an[i]) / std::max({std::abs(fd), std::abs(an[i]), floor});
    if (err > report.max_rel_error) {
      report.max_rel_error = err;
      for (const auto& b : params.blocks()) {
        if (i >= b.offset && i < b.offset + b.size) {
          report.worst_param = b.name + "[" + std::to_string(i - b.offset) + "]";
        }
      }
    }
    ++report.checked;
  }

  // Input gradient on a few grid points.
  double in_max = 0.0;
  for (Eigen::Index i = 0; i < bwd.input_grad.size(); ++i) {
    in_max = std::max(in_max, std::abs(bwd.input_grad.data()[i]));
  }
  const double in_floor = std::max(1e-3 * in_max, 1e-12);
  Matrix probe_in = input;
  for (Eigen::Index i = 0; i < input.size(); i += std::max<Eigen::Index>(1, input.size() / 8)) {
    const double orig = probe_in.data()[i];
    probe_in.data()[i] = orig + step;
    const double lp = loss_of(params, probe_in);
    probe_in.data()[i] = orig - step;
    const double lm = loss_of(params, probe_in);
    probe_in.data()[i] = orig;
    const double fd = (lp - lm) / (2.0 * step);
    const double a = bwd.input_grad.data()[i];
    report.input_max_rel_error = std::max(
        report.input_max_rel_error,
        std::abs(fd - a) / std::max({std::abs(fd), std::abs(a), in_floor}));
  }
  return report;
}

// --- checkpoints ------------------------------------------------------------

std::string model_config_to_json(const ModelConfig& c) {
  return json{{"layers", c.layers},
              {"width", c.width},
              {"modes", c.modes},
              {"bandwidth", c.bandwidth},
              {"input_channels", c.input_channels},
              {"output_channels", c.output_channels},
              {"projection_hidden", c.projection_hidden},
              {"bc", c.bc.to_string()}}
      .dump();
}

namespace {

ModelConfig model_config_from(const json& j) {
  ModelConfig c;
  c.layers = j.at("layers").get<int>();
  c.width = j.at("width").get<int>();
  c.modes = j.at("modes").get<int>();
  c.bandwidth = j.at("bandwidth").get<int>();
  c.input_channels = j.value("input_channels", 1);
  c.output_channels = j.value("output_channels", 1);
  c.projection_hidden = j.value("projection_hidden", 128);
  c.bc = BoundaryCondition::parse(j.at("bc").get<std::string>());
  c.validate();
  return c;
}

}  // namespace

ModelConfig model_config_from_json(const std::string& text) {
  try {
    return model_config_from(json::parse(text));
  } catch (const json::exception& e) {
    throw DataError(std::string("invalid model configuration: ") + e.what());
  }
}

Container checkpoint_to_container(const TrainState& state, const TrainConfig& train) {
  Container c;
  const auto& data = state.params.data();
  for (const auto& b : state.params.blocks()) {
    std::vector<std::uint64_t> shape(b.shape.begin(), b.shape.end());
    c.add(b.name, shape, std::vector<double>(data.begin() + b.offset,
                                             data.begin() + b.offset + b.size));
  }
  c.add("adam.m", {state.adam.m.size()}, state.adam.m);
  c.add("adam.v", {state.adam.v.size()}, state.adam.v);
  std::vector<double> hist;
  hist.reserve(state.history.size() * 4);
  for (const auto& r : state.history) {
    hist.insert(hist.end(), {static_cast<double>(r.epoch), r.lr, r.train_loss, r.test_loss});
  }
  c.add("history", {state.history.size(), 4}, std::move(hist));
  json meta = {
      {"kind", "checkpoint"},
      {"model", json::parse(model_config_to_json(state.params.config()))},
      {"train",
       {{"epochs", train.epochs},
        {"batch_size", train.batch_size},
        {"lr0", train.lr0},
        {"halve_every", train.halve_every},
        {"test_every", train.test_every},
        {"seed", train.seed}}},
      {"seed", train.seed},
      {"epoch", state.epoch},
      {"adam_step", state.adam.step},
      {"history_length", state.history.size()},
  };
  c.metadata = meta.dump();
  return c;
}

TrainState checkpoint_from_container(const Container& c, TrainConfig* train) {
  json meta;
  try {
    meta = json::parse(c.metadata);
    if (meta.value("kind", std::string()) != "checkpoint") {
      throw DataError("container is not a checkpoint");
    }
    TrainState s;
    s.params = ModelParams(model_config_from(meta.at("model")));
    for (const auto& b : s.params.blocks()) {
      const NamedArray& a = c.get(b.name);
      if (a.data.size() != b.size) throw DataError("checkpoint array '" + b.name + "' has wrong size");
      std::copy(a.data.begin(), a.data.end(), s.params.data().begin() + b.offset);
    }
    s.adam.m = c.get("adam.m").data;
    s.adam.v = c.get("adam.v").data;
    if (s.adam.m.size() != s.params.size() || s.adam.v.size() != s.params.size()) {
      throw DataError("checkpoint optimizer moments have wrong size");
    }
    s.adam.step = meta.at("adam_step").get<std::int64_t>();
    s.epoch = meta.at("epoch").get<int>();
    const NamedArray& h = c.get("history");
    if (h.data.size() % 4 != 0) throw DataError("checkpoint history is malformed");
    for (std::size_t i = 0; i < h.data.size(); i += 4) {
      s.history.push_back({static_cast<int>(h.data[i]), h.data[i + 1], h.data[i + 2],
                           h.data[i + 3]});
    }
    if (train) {
      const json& t = meta.at("train");
      train->epochs = t.at("epochs").get<int>();
      train->batch_size = t.at("batch_size").get<int>();
      train->lr0 = t.at("lr0").get<double>();
      train->halve_every = t.at("halve_every").get<int>();
      train->test_every = t.value("test_every", 50);
      train->seed = t.at("seed").get<std::uint64_t>();
    }
    return s;
  } catch (const json::exception& e) {
    throw DataError(std::string("checkpoint metadata is invalid: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw DataError(std::string("checkpoint model configuration is invalid: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const TrainState& state,
                     const TrainConfig& train) {
  write_container(path, checkpoint_to_container(state, train));
}

TrainState load_checkpoint(const std::filesystem::path& path, TrainConfig* train) {
  return checkpoint_from_container(read_container(path), train);
}

}  // namespace opno
