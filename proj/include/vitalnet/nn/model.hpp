#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vitalnet/config.hpp"
#include "vitalnet/data_model.hpp"
#include "vitalnet/nn/layers.hpp"

namespace vitalnet::nn {

inline constexpr std::size_t kFeatureUnits = 100;  // dense1 width, the embedding layer
inline constexpr std::size_t kOutputUnits = 1;

struct ModelConfig {
  std::size_t input_len = 48;  // grid slots per window
  std::size_t input_channels = kChannels;
  std::size_t conv1_filters = 32;
  std::size_t conv1_kernel = 5;
  std::size_t conv2_filters = 64;
  std::size_t conv2_kernel = 5;
  std::size_t pool_size = 2;
  std::size_t pool_stride = 2;
  std::size_t lstm_hidden = 64;
  std::size_t dense1_units = kFeatureUnits;
  std::size_t dense2_units = kOutputUnits;
  Activation conv_activation = Activation::relu;
  Activation dense1_activation = Activation::relu;
  std::uint64_t seed = 1;

  // Rows reaching the LSTM after both convolutions and pooling.
  std::size_t sequence_len() const;
  bool operator==(const ModelConfig&) const = default;
};

void validate_config(const ModelConfig& config);
Json to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const Json& doc);

struct Tensor {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> data;

  bool operator==(const Tensor&) const = default;
};

// Parameter tensors in declaration order.
enum TensorId : std::size_t {
  kConv1Weight,  // [F1, K1, C]
  kConv1Bias,    // [F1]
  kConv2Weight,  // [F2, K2, F1]
  kConv2Bias,    // [F2]
  kLstmInput,    // [4H, F2], gate blocks i, f, g, o
  kLstmRecurrent,  // [4H, H]
  kLstmBias,     // [4H]
  kDense1Weight,  // [100, H]
  kDense1Bias,   // [100]
  kDense2Weight,  // [1, 100]
  kDense2Bias,   // [1]
  kTensorCount
};

struct ModelParams {
  ModelConfig config;
  std::vector<Tensor> tensors;

  // All-zero tensors with the shapes implied by `config`.
  static ModelParams zeros(const ModelConfig& config);
  // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) from config.seed; LSTM forget
  // gate bias set to 1.
  static ModelParams initialize(const ModelConfig& config);

  Tensor& operator[](TensorId id) { return tensors[id]; }
  const Tensor& operator[](TensorId id) const { return tensors[id]; }
  std::size_t parameter_count() const;
  void set_zero();
  bool operator==(const ModelParams&) const = default;
};

struct ForwardResult {
  double probability = 0.5;
  std::vector<double> features;  // dense1 output, kFeatureUnits long
};

// Every intermediate needed to backpropagate one window.
struct ForwardCache {
  Matrix conv1_pre, conv1_out;
  Matrix conv2_pre, conv2_out;
  PoolResult pool;
  std::vector<LstmState> states;  // states[0] is the zero state
  std::vector<LstmStep> steps;
  std::vector<double> dense1_pre, dense1_out;
  double logit = 0.0;
  double probability = 0.5;
};

ForwardResult forward(const ModelParams& params, const Matrix& window);
ForwardResult forward(const ModelParams& params, const Matrix& window, ForwardCache& cache);

// Hooks used by the gradient-check harness to prove it notices broken code.
struct BackwardOptions {
  bool flip_lstm_input_gradient = false;
};

// Accumulates dL/dtheta into `grads` given dL/dlogit for one cached window.
void backward(const ModelParams& params, const Matrix& window, const ForwardCache& cache, double d_logit,
              ModelParams& grads, const BackwardOptions& options = {});

// Mean clamped BCE over a batch and its gradient (grads is overwritten).
double batch_loss_and_gradient(const ModelParams& params, std::span<const Matrix* const> windows,
                               std::span<const int> labels, ModelParams& grads,
                               const BackwardOptions& options = {});
double batch_loss(const ModelParams& params, std::span<const Matrix* const> windows, std::span<const int> labels);

}  // namespace vitalnet::nn
