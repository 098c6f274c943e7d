#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "opno/compacting.hpp"

namespace opno {

/// Channels x grid points, one row per channel so transforms run on
/// contiguous memory.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<Matrix>;
using ConstMatrixMap = Eigen::Map<const Matrix>;
using VectorMap = Eigen::Map<Eigen::VectorXd>;
using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;

struct ModelConfig {
  int layers = 4;
  int width = 50;
  int modes = 40;
  int bandwidth = 3;
  /// Data channels of the input function; the grid coordinate is appended
  /// internally, so the lift sees input_channels + 1 features.
  int input_channels = 1;
  int output_channels = 1;
  int projection_hidden = 128;
  BoundaryCondition bc = BoundaryCondition::neumann();

  int lift_features() const { return input_channels + 1; }
  int half_band() const { return (bandwidth - 1) / 2; }

  /// Throws InvalidArgument on bad sizes.
  void validate() const;
  /// Additionally checks that `degree` can host `modes` compact modes.
  void validate_for_degree(int degree) const;
};

/// One named parameter array inside the flat parameter vector.
struct ParamBlock {
  std::string name;
  std::vector<std::size_t> shape;
  std::size_t offset = 0;
  std::size_t size = 0;
};

/// All trainable parameters stored in one contiguous vector. The same type
/// holds gradients and optimizer moments.
///
/// Spectral weights of layer l are laid out (mode, band, out, in): block
/// (m, b) is a width x width row-major matrix applied to Chebyshev mode
/// m + b - half_band of the input to produce compact mode m of the output.
class ModelParams {
 public:
  ModelParams() = default;
  /// Zero-initialized parameters for `config`.
  explicit ModelParams(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }
  const std::vector<ParamBlock>& blocks() const { return blocks_; }
  const ParamBlock& block(const std::string& name) const;
  std::size_t size() const { return data_.size(); }

  MatrixMap lift() { return matrix(lift_); }
  ConstMatrixMap lift() const { return matrix(lift_); }
  double* spectral(int layer) { return data_.data() + blocks_[spectral_[layer]].offset; }
  const double* spectral(int layer) const { return data_.data() + blocks_[spectral_[layer]].offset; }
  MatrixMap pointwise(int layer) { return matrix(pointwise_[layer]); }
  ConstMatrixMap pointwise(int layer) const { return matrix(pointwise_[layer]); }
  VectorMap pointwise_bias(int layer) { return vector(pointwise_bias_[layer]); }
  ConstVectorMap pointwise_bias(int layer) const { return vector(pointwise_bias_[layer]); }
  MatrixMap proj_weight1() { return matrix(q1_); }
  ConstMatrixMap proj_weight1() const { return matrix(q1_); }
  VectorMap proj_bias1() { return vector(q1_bias_); }
  ConstVectorMap proj_bias1() const { return vector(q1_bias_); }
  MatrixMap proj_weight2() { return matrix(q2_); }
  ConstMatrixMap proj_weight2() const { return matrix(q2_); }
  VectorMap proj_bias2() { return vector(q2_bias_); }
  ConstVectorMap proj_bias2() const { return vector(q2_bias_); }

  /// Spectral block (m, band index 0..w-1) of a layer.
  MatrixMap spectral_block(int layer, int mode, int band);
  ConstMatrixMap spectral_block(int layer, int mode, int band) const;

 private:
  std::size_t add(const std::string& name, std::vector<std::size_t> shape);
  MatrixMap matrix(std::size_t idx);
  ConstMatrixMap matrix(std::size_t idx) const;
  VectorMap vector(std::size_t idx);
  ConstVectorMap vector(std::size_t idx) const;

  ModelConfig config_;
  std::vector<double> data_;
  std::vector<ParamBlock> blocks_;
  std::size_t lift_ = 0, q1_ = 0, q1_bias_ = 0, q2_ = 0, q2_bias_ = 0;
  std::vector<std::size_t> spectral_, pointwise_, pointwise_bias_;
};

/// Deterministic uniform initialization: spectral weights in
/// +-1/(width*bandwidth), layer pointwise weights in +-1/width, lift and
/// projection in +-1/sqrt(fan_in). Biases start at zero.
ModelParams init_params(const ModelConfig& config, std::uint64_t seed);

// --- building blocks -------------------------------------------------------

double gelu(double x);
double gelu_derivative(double x);

/// Appends the grid coordinate as an extra feature row.
Matrix featurize(const Matrix& input);

/// Pointwise lift: P * features.
Matrix lift(const Matrix& features, const ConstMatrixMap& weight);

/// Chebyshev transform per channel, banded channel mixing on the lowest
/// `modes` coefficients, then the inverse Shen transform (compact -> grid).
/// If `coeffs_t` is given it receives the transposed Chebyshev coefficients
/// (grid points x channels) needed for the weight gradient.
Matrix spectral_kernel(const Matrix& v, const double* weights, const ModelConfig& config,
                       Matrix* coeffs_t = nullptr);

/// v + GeLU(W v + bias + spectral_kernel(v)).
Matrix opno_layer(const Matrix& v, const ModelParams& params, int layer);

/// Shen round trip per channel: values -> compact coefficients -> values.
/// The result satisfies `bc` for any input.
Matrix project_onto_basis(const Matrix& q, const BoundaryCondition& bc);

/// Pointwise network Q followed by project_onto_basis.
Matrix projection(const Matrix& v, const ModelParams& params);

// --- whole model -----------------------------------------------------------

enum class ForwardMode { inference, training };

/// Intermediates recorded by a training-mode forward pass.
struct ActivationTape {
  bool valid = false;
  Matrix features;                  // lift input (input + coordinate row)
  std::vector<Matrix> hidden;       // v_0 .. v_L
  std::vector<Matrix> coeffs_t;     // per layer, transposed Chebyshev coefficients of v_l
  std::vector<Matrix> pre_act;      // per layer, W v + b + K v
  Matrix proj_pre_act;              // Q1 v_L + b1
};

struct ForwardResult {
  Matrix output;
  std::optional<ActivationTape> tape;
};

/// Evaluates Q o layer_L o ... o layer_1 o lift on `input`
/// (input_channels x (N+1) samples on the CGL grid of degree N).
ForwardResult model_forward(const ModelParams& params, const Matrix& input,
                            ForwardMode mode = ForwardMode::inference);

struct BackwardResult {
  ModelParams grads;
  Matrix input_grad;
};

/// Reverse-mode gradients of <output_grad, output> with respect to every
/// parameter and to the input. Throws InvalidArgument if the tape is empty.
BackwardResult model_backward(const ModelParams& params, const ActivationTape& tape,
                              const Matrix& output_grad);

/// As model_backward, accumulating parameter gradients into `grads`
/// (scaled by `scale`). Returns the input gradient.
Matrix model_backward_accumulate(const ModelParams& params, const ActivationTape& tape,
                                 const Matrix& output_grad, ModelParams& grads,
                                 double scale = 1.0);

}  // namespace opno
