#include "vitalnet/nn/model.hpp"

#include <cmath>
#include <numeric>

#include "vitalnet/error.hpp"
#include "vitalnet/rng.hpp"

namespace vitalnet::nn {

std::size_t ModelConfig::sequence_len() const {
  const std::size_t after_convs = input_len - conv1_kernel - conv2_kernel + 2;
  return (after_convs - pool_size) / pool_stride + 1;
}

void validate_config(const ModelConfig& c) {
  for (std::size_t v : {c.input_len, c.input_channels, c.conv1_filters, c.conv1_kernel, c.conv2_filters,
                        c.conv2_kernel, c.pool_size, c.pool_stride, c.lstm_hidden}) {
    if (v < 1) throw ValidationError("model config: all sizes must be at least 1");
  }
  if (c.dense1_units != kFeatureUnits) throw ValidationError("model config: dense1_units is fixed at 100");
  if (c.dense2_units != kOutputUnits) throw ValidationError("model config: dense2_units is fixed at 1");
  if (c.input_len + 2 < c.conv1_kernel + c.conv2_kernel + c.pool_size) {
    throw ValidationError("model config: input_len " + std::to_string(c.input_len) +
                          " too short for the convolution kernels and pool size");
  }
}

Json to_json(const ModelConfig& c) {
  return Json{{"input_len", c.input_len},
              {"input_channels", c.input_channels},
              {"conv1_filters", c.conv1_filters},
              {"conv1_kernel", c.conv1_kernel},
              {"conv2_filters", c.conv2_filters},
              {"conv2_kernel", c.conv2_kernel},
              {"pool_size", c.pool_size},
              {"pool_stride", c.pool_stride},
              {"lstm_hidden", c.lstm_hidden},
              {"dense1_units", c.dense1_units},
              {"dense2_units", c.dense2_units},
              {"conv_activation", std::string(to_string(c.conv_activation))},
              {"dense1_activation", std::string(to_string(c.dense1_activation))},
              {"seed", c.seed}};
}

ModelConfig model_config_from_json(const Json& doc) {
  ModelConfig c;
  try {
    c.input_len = doc.value("input_len", c.input_len);
    c.input_channels = doc.value("input_channels", c.input_channels);
    c.conv1_filters = doc.value("conv1_filters", c.conv1_filters);
    c.conv1_kernel = doc.value("conv1_kernel", c.conv1_kernel);
    c.conv2_filters = doc.value("conv2_filters", c.conv2_filters);
    c.conv2_kernel = doc.value("conv2_kernel", c.conv2_kernel);
    c.pool_size = doc.value("pool_size", c.pool_size);
    c.pool_stride = doc.value("pool_stride", c.pool_stride);
    c.lstm_hidden = doc.value("lstm_hidden", c.lstm_hidden);
    c.dense1_units = doc.value("dense1_units", c.dense1_units);
    c.dense2_units = doc.value("dense2_units", c.dense2_units);
    c.conv_activation = activation_from_string(doc.value("conv_activation", std::string("relu")));
    c.dense1_activation = activation_from_string(doc.value("dense1_activation", std::string("relu")));
    c.seed = doc.value("seed", c.seed);
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("model config: ") + e.what());
  }
  validate_config(c);
  return c;
}

namespace {

std::size_t product(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

Tensor make_tensor(std::string name, std::vector<std::size_t> shape) {
  const std::size_t n = product(shape);
  return {std::move(name), std::move(shape), std::vector<double>(n, 0.0)};
}

LstmWeights lstm_weights(const ModelParams& p) {
  return {p[kLstmInput].data, p[kLstmRecurrent].data, p[kLstmBias].data, p.config.conv2_filters,
          p.config.lstm_hidden};
}

ConvShape conv1_shape(const ModelConfig& c) { return {c.conv1_filters, c.conv1_kernel, c.input_channels}; }
ConvShape conv2_shape(const ModelConfig& c) { return {c.conv2_filters, c.conv2_kernel, c.conv1_filters}; }

}  // namespace

ModelParams ModelParams::zeros(const ModelConfig& config) {
  validate_config(config);
  const auto& c = config;
  const std::size_t H = c.lstm_hidden;
  ModelParams p;
  p.config = config;
  p.tensors = {
      make_tensor("conv1.weight", {c.conv1_filters, c.conv1_kernel, c.input_channels}),
      make_tensor("conv1.bias", {c.conv1_filters}),
      make_tensor("conv2.weight", {c.conv2_filters, c.conv2_kernel, c.conv1_filters}),
      make_tensor("conv2.bias", {c.conv2_filters}),
      make_tensor("lstm.weight_ih", {4 * H, c.conv2_filters}),
      make_tensor("lstm.weight_hh", {4 * H, H}),
      make_tensor("lstm.bias", {4 * H}),
      make_tensor("dense1.weight", {c.dense1_units, H}),
      make_tensor("dense1.bias", {c.dense1_units}),
      make_tensor("dense2.weight", {c.dense2_units, c.dense1_units}),
      make_tensor("dense2.bias", {c.dense2_units}),
  };
  return p;
}

ModelParams ModelParams::initialize(const ModelConfig& config) {
  ModelParams p = zeros(config);
  const auto& c = config;
  const std::size_t H = c.lstm_hidden;
  const std::array<double, kTensorCount> fan_in = {
      static_cast<double>(c.conv1_kernel * c.input_channels), static_cast<double>(c.conv1_kernel * c.input_channels),
      static_cast<double>(c.conv2_kernel * c.conv1_filters),  static_cast<double>(c.conv2_kernel * c.conv1_filters),
      static_cast<double>(c.conv2_filters + H),               static_cast<double>(c.conv2_filters + H),
      static_cast<double>(c.conv2_filters + H),               static_cast<double>(H),
      static_cast<double>(H),                                 static_cast<double>(c.dense1_units),
      static_cast<double>(c.dense1_units)};
  Rng rng(config.seed);
  for (std::size_t id = 0; id < kTensorCount; ++id) {
    const double bound = 1.0 / std::sqrt(fan_in[id]);
    for (double& v : p.tensors[id].data) v = rng.uniform(-bound, bound);
  }
  for (std::size_t k = 0; k < H; ++k) p[kLstmBias].data[H + k] = 1.0;
  return p;
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors) n += t.data.size();
  return n;
}

void ModelParams::set_zero() {
  for (auto& t : tensors) std::fill(t.data.begin(), t.data.end(), 0.0);
}

ForwardResult forward(const ModelParams& params, const Matrix& window, ForwardCache& cache) {
  const auto& c = params.config;
  if (window.rows() != c.input_len || window.cols() != c.input_channels) {
    throw ShapeError("forward: window is " + std::to_string(window.rows()) + "x" + std::to_string(window.cols()) +
                     ", model expects " + std::to_string(c.input_len) + "x" + std::to_string(c.input_channels));
  }

  cache.conv1_pre = conv1d_pre(window, params[kConv1Weight].data, params[kConv1Bias].data, conv1_shape(c));
  cache.conv1_out = cache.conv1_pre;
  for (double& v : cache.conv1_out.data()) v = activate(c.conv_activation, v);

  cache.conv2_pre = conv1d_pre(cache.conv1_out, params[kConv2Weight].data, params[kConv2Bias].data, conv2_shape(c));
  cache.conv2_out = cache.conv2_pre;
  for (double& v : cache.conv2_out.data()) v = activate(c.conv_activation, v);

  cache.pool = maxpool1d(cache.conv2_out, c.pool_size, c.pool_stride);

  const auto lw = lstm_weights(params);
  const std::size_t steps = cache.pool.output.rows();
  cache.states.assign(1, LstmState{std::vector<double>(c.lstm_hidden, 0.0), std::vector<double>(c.lstm_hidden, 0.0)});
  cache.steps.clear();
  cache.steps.reserve(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    const auto& prev = cache.states.back();
    cache.steps.push_back(lstm_step(cache.pool.output.row(t), prev.h, prev.c, lw));
    cache.states.push_back({cache.steps.back().h, cache.steps.back().c});
  }

  cache.dense1_pre = dense_pre(cache.states.back().h, params[kDense1Weight].data, params[kDense1Bias].data,
                               c.dense1_units);
  cache.dense1_out = cache.dense1_pre;
  for (double& v : cache.dense1_out) v = activate(c.dense1_activation, v);

  cache.logit = dense_pre(cache.dense1_out, params[kDense2Weight].data, params[kDense2Bias].data, 1)[0];
  cache.probability = sigmoid(cache.logit);
  return {cache.probability, cache.dense1_out};
}

ForwardResult forward(const ModelParams& params, const Matrix& window) {
  ForwardCache cache;
  return forward(params, window, cache);
}

void backward(const ModelParams& params, const Matrix& window, const ForwardCache& cache, double d_logit,
              ModelParams& grads, const BackwardOptions& options) {
  const auto& c = params.config;
  const std::size_t H = c.lstm_hidden;

  std::vector<double> d_dense1(c.dense1_units);
  dense_backward(cache.dense1_out, params[kDense2Weight].data, std::span<const double>(&d_logit, 1),
                 grads[kDense2Weight].data, grads[kDense2Bias].data, d_dense1);
  for (std::size_t k = 0; k < d_dense1.size(); ++k) {
    d_dense1[k] *= activate_derivative(c.dense1_activation, cache.dense1_pre[k], cache.dense1_out[k]);
  }

  std::vector<double> dh(H), dc(H, 0.0);
  dense_backward(cache.states.back().h, params[kDense1Weight].data, d_dense1, grads[kDense1Weight].data,
                 grads[kDense1Bias].data, dh);

  const auto lw = lstm_weights(params);
  const LstmGradients lg{grads[kLstmInput].data, grads[kLstmRecurrent].data, grads[kLstmBias].data};
  Matrix d_pool(cache.pool.output.rows(), cache.pool.output.cols());
  for (std::size_t t = cache.steps.size(); t-- > 0;) {
    lstm_step_backward(cache.steps[t], cache.pool.output.row(t), cache.states[t].h, cache.states[t].c, lw, dh, dc,
                       lg, d_pool.row(t));
  }
  if (options.flip_lstm_input_gradient) {
    for (double& v : d_pool.data()) v = -v;
  }

  Matrix d_conv2 = maxpool1d_backward(d_pool, cache.pool.argmax, cache.conv2_out.rows());
  for (std::size_t k = 0; k < d_conv2.data().size(); ++k) {
    d_conv2.data()[k] *= activate_derivative(c.conv_activation, cache.conv2_pre.data()[k], cache.conv2_out.data()[k]);
  }
  Matrix d_conv1;
  conv1d_backward(cache.conv1_out, params[kConv2Weight].data, conv2_shape(c), d_conv2, grads[kConv2Weight].data,
                  grads[kConv2Bias].data, &d_conv1);
  for (std::size_t k = 0; k < d_conv1.data().size(); ++k) {
    d_conv1.data()[k] *= activate_derivative(c.conv_activation, cache.conv1_pre.data()[k], cache.conv1_out.data()[k]);
  }
  conv1d_backward(window, params[kConv1Weight].data, conv1_shape(c), d_conv1, grads[kConv1Weight].data,
                  grads[kConv1Bias].data, nullptr);
}

double batch_loss_and_gradient(const ModelParams& params, std::span<const Matrix* const> windows,
                               std::span<const int> labels, ModelParams& grads, const BackwardOptions& options) {
  if (windows.size() != labels.size() || windows.empty()) {
    throw ShapeError("batch: windows and labels must be non-empty and equal in length");
  }
  if (grads.tensors.size() != params.tensors.size()) grads = ModelParams::zeros(params.config);
  grads.set_zero();

  const double scale = 1.0 / static_cast<double>(windows.size());
  double loss = 0.0;
  ForwardCache cache;
  for (std::size_t b = 0; b < windows.size(); ++b) {
    const double p = forward(params, *windows[b], cache).probability;
    loss += bce_loss(p, labels[b]);
    const double d_logit = bce_grad(p, labels[b]) * p * (1.0 - p) * scale;
    backward(params, *windows[b], cache, d_logit, grads, options);
  }
  return loss * scale;
}

double batch_loss(const ModelParams& params, std::span<const Matrix* const> windows, std::span<const int> labels) {
  double loss = 0.0;
  for (std::size_t b = 0; b < windows.size(); ++b) loss += bce_loss(forward(params, *windows[b]).probability, labels[b]);
  return loss / static_cast<double>(windows.size());
}

}  // namespace vitalnet::nn
