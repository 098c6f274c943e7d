#include "opno/model.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "opno/chebyshev.hpp"
#include "opno/error.hpp"

namespace opno {
namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidArgument(what);
}

// Chebyshev coefficients of every row of v, returned transposed
// (grid points x channels).
Matrix chebyshev_rows_transposed(const Matrix& v) {
  const int n = static_cast<int>(v.cols()) - 1;
  const auto& fct = ChebyshevTransform::get(n);
  Matrix ct(v.cols(), v.rows());
  std::vector<double> coeffs(v.cols());
  for (Eigen::Index c = 0; c < v.rows(); ++c) {
    fct.forward({v.row(c).data(), static_cast<std::size_t>(v.cols())}, coeffs);
    for (Eigen::Index k = 0; k < v.cols(); ++k) ct(k, c) = coeffs[k];
  }
  return ct;
}

template <typename F>
Matrix map_elements(const Matrix& m, F f) {
  Matrix out(m.rows(), m.cols());
  const double* src = m.data();
  double* dst = out.data();
  for (Eigen::Index i = 0; i < m.size(); ++i) dst[i] = f(src[i]);
  return out;
}

}  // namespace

// --- config / params -------------------------------------------------------

void ModelConfig::validate() const {
  require(layers >= 1, "model needs at least one layer");
  require(width >= 1, "model width must be >= 1");
  require(modes >= 1, "model modes must be >= 1");
  require(bandwidth >= 1 && bandwidth % 2 == 1, "bandwidth must be odd and >= 1");
  require(input_channels >= 1, "input_channels must be >= 1");
  require(output_channels >= 1, "output_channels must be >= 1");
  require(projection_hidden >= 1, "projection_hidden must be >= 1");
}

void ModelConfig::validate_for_degree(int degree) const {
  validate();
  require(degree >= 2, "grid degree must be >= 2");
  require(modes <= degree - 1, "modes (" + std::to_string(modes) +
                                   ") exceeds the compact basis size N-1 = " +
                                   std::to_string(degree - 1));
}

ModelParams::ModelParams(const ModelConfig& config) : config_(config) {
  config.validate();
  const auto d = static_cast<std::size_t>(config.width);
  lift_ = add("lift", {d, static_cast<std::size_t>(config.lift_features())});
  for (int l = 0; l < config.layers; ++l) {
    const std::string p = "layer" + std::to_string(l) + ".";
    spectral_.push_back(add(p + "spectral", {static_cast<std::size_t>(config.modes),
                                             static_cast<std::size_t>(config.bandwidth), d, d}));
    pointwise_.push_back(add(p + "weight", {d, d}));
    pointwise_bias_.push_back(add(p + "bias", {d}));
  }
  const auto h = static_cast<std::size_t>(config.projection_hidden);
  const auto o = static_cast<std::size_t>(config.output_channels);
  q1_ = add("proj.weight1", {h, d});
  q1_bias_ = add("proj.bias1", {h});
  q2_ = add("proj.weight2", {o, h});
  q2_bias_ = add("proj.bias2", {o});
}

std::size_t ModelParams::add(const std::string& name, std::vector<std::size_t> shape) {
  ParamBlock b;
  b.name = name;
  b.offset = data_.size();
  b.size = 1;
  for (auto s : shape) b.size *= s;
  b.shape = std::move(shape);
  data_.resize(data_.size() + b.size, 0.0);
  blocks_.push_back(std::move(b));
  return blocks_.size() - 1;
}

const ParamBlock& ModelParams::block(const std::string& name) const {
  for (const auto& b : blocks_) {
    if (b.name == name) return b;
  }
  throw InvalidArgument("no parameter block named '" + name + "'");
}

MatrixMap ModelParams::matrix(std::size_t idx) {
  const auto& b = blocks_[idx];
  return {data_.data() + b.offset, static_cast<Eigen::Index>(b.shape[0]),
          static_cast<Eigen::Index>(b.shape[1])};
}
ConstMatrixMap ModelParams::matrix(std::size_t idx) const {
  const auto& b = blocks_[idx];
  return {data_.data() + b.offset, static_cast<Eigen::Index>(b.shape[0]),
          static_cast<Eigen::Index>(b.shape[1])};
}
VectorMap ModelParams::vector(std::size_t idx) {
  const auto& b = blocks_[idx];
  return {data_.data() + b.offset, static_cast<Eigen::Index>(b.size)};
}
ConstVectorMap ModelParams::vector(std::size_t idx) const {
  const auto& b = blocks_[idx];
  return {data_.data() + b.offset, static_cast<Eigen::Index>(b.size)};
}

MatrixMap ModelParams::spectral_block(int layer, int mode, int band) {
  const int d = config_.width;
  return {spectral(layer) + (static_cast<std::size_t>(mode) * config_.bandwidth + band) * d * d, d,
          d};
}
ConstMatrixMap ModelParams::spectral_block(int layer, int mode, int band) const {
  const int d = config_.width;
  return {spectral(layer) + (static_cast<std::size_t>(mode) * config_.bandwidth + band) * d * d, d,
          d};
}

ModelParams init_params(const ModelConfig& config, std::uint64_t seed) {
  ModelParams params(config);
  std::mt19937_64 rng(seed);
  auto fill = [&](const std::string& name, double bound) {
    const auto& b = params.block(name);
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (std::size_t i = 0; i < b.size; ++i) params.data()[b.offset + i] = dist(rng);
  };
  const double d = config.width;
  fill("lift", 1.0 / std::sqrt(static_cast<double>(config.lift_features())));
  for (int l = 0; l < config.layers; ++l) {
    const std::string p = "layer" + std::to_string(l) + ".";
    fill(p + "spectral", 1.0 / (d * config.bandwidth));
    fill(p + "weight", 1.0 / d);
  }
  fill("proj.weight1", 1.0 / std::sqrt(d));
  fill("proj.weight2", 1.0 / std::sqrt(static_cast<double>(config.projection_hidden)));
  return params;
}

// --- building blocks -------------------------------------------------------

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0)); }

double gelu_derivative(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0));
  const double pdf = std::exp(-0.5 * x * x) * std::numbers::inv_sqrtpi / std::numbers::sqrt2;
  return cdf + x * pdf;
}

Matrix featurize(const Matrix& input) {
  const int n = static_cast<int>(input.cols()) - 1;
  const GridSpec grid = cgl_grid(n);
  Matrix features(input.rows() + 1, input.cols());
  features.topRows(input.rows()) = input;
  for (Eigen::Index j = 0; j < input.cols(); ++j) features(input.rows(), j) = grid.nodes[j];
  return features;
}

Matrix lift(const Matrix& features, const ConstMatrixMap& weight) {
  require(features.rows() == weight.cols(), "lift: feature count does not match lift weight");
  return weight * features;
}

Matrix spectral_kernel(const Matrix& v, const double* weights, const ModelConfig& config,
                       Matrix* coeffs_t) {
  const int n = static_cast<int>(v.cols()) - 1;
  config.validate_for_degree(n);
  require(v.rows() == config.width, "spectral_kernel: channel count does not match width");
  const int d = config.width, w = config.bandwidth, h = config.half_band(), modes = config.modes;

  Matrix ct = chebyshev_rows_transposed(v);
  // Mixed compact coefficients, modes x channels.
  Matrix mixed = Matrix::Zero(modes, d);
  for (int m = 0; m < modes; ++m) {
    for (int bi = 0; bi < w; ++bi) {
      const int src = m + bi - h;
      if (src < 0 || src > n) continue;
      ConstMatrixMap a(weights + (static_cast<std::size_t>(m) * w + bi) * d * d, d, d);
      mixed.row(m).noalias() += ct.row(src) * a.transpose();
    }
  }

  const CompactBasis& basis = CompactBasis::get(config.bc, n);
  const auto& fct = ChebyshevTransform::get(n);
  Matrix out(d, n + 1);
  std::vector<double> beta(basis.compact_size(), 0.0), alpha(basis.cheb_size());
  for (int c = 0; c < d; ++c) {
    for (int m = 0; m < modes; ++m) beta[m] = mixed(m, c);
    basis.backward(beta, alpha);
    fct.backward(alpha, {out.row(c).data(), static_cast<std::size_t>(n + 1)});
  }
  if (coeffs_t) *coeffs_t = std::move(ct);
  return out;
}

Matrix opno_layer(const Matrix& v, const ModelParams& params, int layer) {
  Matrix z = spectral_kernel(v, params.spectral(layer), params.config());
  z.noalias() += params.pointwise(layer) * v;
  z.colwise() += params.pointwise_bias(layer);
  return v + map_elements(z, gelu);
}

Matrix project_onto_basis(const Matrix& q, const BoundaryCondition& bc) {
  const int n = static_cast<int>(q.cols()) - 1;
  const auto& fct = ChebyshevTransform::get(n);
  const CompactBasis& basis = CompactBasis::get(bc, n);
  Matrix out(q.rows(), q.cols());
  std::vector<double> alpha(basis.cheb_size()), beta(basis.compact_size());
  const auto len = static_cast<std::size_t>(n + 1);
  for (Eigen::Index c = 0; c < q.rows(); ++c) {
    fct.forward({q.row(c).data(), len}, alpha);
    basis.forward(alpha, beta);
    basis.backward(beta, alpha);
    fct.backward(alpha, {out.row(c).data(), len});
  }
  return out;
}

Matrix projection(const Matrix& v, const ModelParams& params) {
  Matrix hidden = params.proj_weight1() * v;
  hidden.colwise() += params.proj_bias1();
  Matrix q = params.proj_weight2() * map_elements(hidden, gelu);
  q.colwise() += params.proj_bias2();
  return project_onto_basis(q, params.config().bc);
}

// --- whole model -----------------------------------------------------------

ForwardResult model_forward(const ModelParams& params, const Matrix& input, ForwardMode mode) {
  const ModelConfig& config = params.config();
  const int n = static_cast<int>(input.cols()) - 1;
  config.validate_for_degree(n);
  require(input.rows() == config.input_channels, "model_forward: wrong number of input channels");

  ForwardResult result;
  const bool record = mode == ForwardMode::training;
  ActivationTape tape;

  Matrix features = featurize(input);
  Matrix v = lift(features, params.lift());
  if (record) {
    tape.features = std::move(features);
    tape.hidden.push_back(v);
  }
  for (int l = 0; l < config.layers; ++l) {
    Matrix ct;
    Matrix z = spectral_kernel(v, params.spectral(l), config, record ? &ct : nullptr);
    z.noalias() += params.pointwise(l) * v;
    z.colwise() += params.pointwise_bias(l);
    v += map_elements(z, gelu);
    if (record) {
      tape.coeffs_t.push_back(std::move(ct));
      tape.pre_act.push_back(std::move(z));
      tape.hidden.push_back(v);
    }
  }
  Matrix hidden = params.proj_weight1() * v;
  hidden.colwise() += params.proj_bias1();
  Matrix q = params.proj_weight2() * map_elements(hidden, gelu);
  q.colwise() += params.proj_bias2();
  result.output = project_onto_basis(q, config.bc);
  if (record) {
    tape.proj_pre_act = std::move(hidden);
    tape.valid = true;
    result.tape = std::move(tape);
  }
  return result;
}

Matrix model_backward_accumulate(const ModelParams& params, const ActivationTape& tape,
                                 const Matrix& output_grad, ModelParams& grads, double scale) {
  if (!tape.valid) throw InvalidArgument("model_backward: no activation tape (run training mode)");
  const ModelConfig& config = params.config();
  const int n = static_cast<int>(output_grad.cols()) - 1;
  require(output_grad.rows() == config.output_channels && !tape.hidden.empty() &&
              tape.hidden.front().cols() == n + 1,
          "model_backward: output gradient shape does not match tape");
  require(grads.size() == params.size(), "model_backward: gradient buffer has wrong layout");
  const int d = config.width, w = config.bandwidth, h = config.half_band(), modes = config.modes;
  const auto len = static_cast<std::size_t>(n + 1);
  const auto& fct = ChebyshevTransform::get(n);
  const CompactBasis& basis = CompactBasis::get(config.bc, n);
  std::vector<double> t1(basis.cheb_size()), t2(basis.compact_size()), t3(basis.cheb_size());

  // Projection: out = B Cb Cf F q, so q_grad = F^T Cf^T Cb^T B^T out_grad.
  Matrix gq(output_grad.rows(), output_grad.cols());
  for (Eigen::Index c = 0; c < output_grad.rows(); ++c) {
    fct.backward_adjoint({output_grad.row(c).data(), len}, t1);
    basis.backward_adjoint(t1, t2);
    basis.forward_adjoint(t2, t3);
    fct.forward_adjoint(t3, {gq.row(c).data(), len});
  }
  if (scale != 1.0) gq *= scale;

  const Matrix& pre = tape.proj_pre_act;
  const Matrix act = map_elements(pre, gelu);
  grads.proj_weight2().noalias() += gq * act.transpose();
  grads.proj_bias2() += gq.rowwise().sum();
  Matrix gh = params.proj_weight2().transpose() * gq;
  gh.array() *= map_elements(pre, gelu_derivative).array();
  const Matrix& v_last = tape.hidden.back();
  grads.proj_weight1().noalias() += gh * v_last.transpose();
  grads.proj_bias1() += gh.rowwise().sum();
  Matrix gv = params.proj_weight1().transpose() * gh;

  std::vector<double> beta_grad(basis.compact_size());
  for (int l = config.layers - 1; l >= 0; --l) {
    const Matrix& v = tape.hidden[l];
    Matrix gz = gv;
    gz.array() *= map_elements(tape.pre_act[l], gelu_derivative).array();

    grads.pointwise(l).noalias() += gz * v.transpose();
    grads.pointwise_bias(l) += gz.rowwise().sum();
    gv.noalias() += params.pointwise(l).transpose() * gz;

    // Kernel branch: z_K = B Cb [mixed], so mixed_grad = (Cb^T B^T gz)[0:modes].
    Matrix g_mixed(modes, d);
    for (int c = 0; c < d; ++c) {
      fct.backward_adjoint({gz.row(c).data(), len}, t1);
      basis.backward_adjoint(t1, beta_grad);
      for (int m = 0; m < modes; ++m) g_mixed(m, c) = beta_grad[m];
    }
    const Matrix& ct = tape.coeffs_t[l];
    Matrix g_ct = Matrix::Zero(n + 1, d);
    for (int m = 0; m < modes; ++m) {
      for (int bi = 0; bi < w; ++bi) {
        const int src = m + bi - h;
        if (src < 0 || src > n) continue;
        grads.spectral_block(l, m, bi).noalias() += g_mixed.row(m).transpose() * ct.row(src);
        g_ct.row(src).noalias() += g_mixed.row(m) * params.spectral_block(l, m, bi);
      }
    }
    std::vector<double> col(len), vg(len);
    for (int c = 0; c < d; ++c) {
      for (std::size_t k = 0; k < len; ++k) col[k] = g_ct(static_cast<Eigen::Index>(k), c);
      fct.forward_adjoint(col, vg);
      for (std::size_t k = 0; k < len; ++k) gv(c, static_cast<Eigen::Index>(k)) += vg[k];
    }
  }

  grads.lift().noalias() += gv * tape.features.transpose();
  Matrix g_features = params.lift().transpose() * gv;
  return g_features.topRows(config.input_channels);
}

BackwardResult model_backward(const ModelParams& params, const ActivationTape& tape,
                              const Matrix& output_grad) {
  BackwardResult result{ModelParams(params.config()), {}};
  result.input_grad = model_backward_accumulate(params, tape, output_grad, result.grads);
  return result;
}

}  // namespace opno
