#include "vitalnet/nn/grad_check.hpp"

#include <cmath>

#include "vitalnet/rng.hpp"

namespace vitalnet::nn {

namespace {

// Pre-activations this close to a ReLU kink, or pool candidates this close to
// the window max, make central differences straddle a non-differentiable point.
constexpr double kKinkMargin = 1e-4;
constexpr int kMaxResamples = 1000;

bool clear_of_kinks(const ModelParams& params, const Matrix& window) {
  ForwardCache cache;
  forward(params, window, cache);
  const auto& c = params.config;
  auto near_kink = [](const Matrix& pre) {
    for (double v : pre.data()) {
      if (std::fabs(v) < kKinkMargin) return true;
    }
    return false;
  };
  if (c.conv_activation == Activation::relu && (near_kink(cache.conv1_pre) || near_kink(cache.conv2_pre))) {
    return false;
  }
  if (c.dense1_activation == Activation::relu) {
    for (double v : cache.dense1_pre) {
      if (std::fabs(v) < kKinkMargin) return false;
    }
  }
  const auto& pooled = cache.conv2_out;
  const std::size_t out_rows = cache.pool.output.rows();
  for (std::size_t p = 0; p < out_rows; ++p) {
    for (std::size_t ch = 0; ch < pooled.cols(); ++ch) {
      const std::size_t best = cache.pool.argmax[p * pooled.cols() + ch];
      for (std::size_t t = p * c.pool_stride; t < p * c.pool_stride + c.pool_size; ++t) {
        if (t == best) continue;
        // Two ReLU-dead candidates pass no gradient whichever wins.
        if (c.conv_activation == Activation::relu && pooled(best, ch) == 0.0) continue;
        if (pooled(best, ch) - pooled(t, ch) < kKinkMargin) return false;
      }
    }
  }
  return true;
}

}  // namespace

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::fabs(analytic), std::fabs(numeric), floor});
  return std::fabs(analytic - numeric) / denom;
}

GradCheckResult grad_check(const ModelConfig& config, const GradCheckOptions& options) {
  ModelParams params = ModelParams::initialize(config);
  Rng rng(options.seed);
  GradCheckResult result;

  std::vector<Matrix> windows(options.batch_size, Matrix(config.input_len, config.input_channels));
  std::vector<int> labels(options.batch_size);
  for (std::size_t b = 0; b < options.batch_size; ++b) {
    labels[b] = static_cast<int>(b % 2);
    for (int attempt = 0;; ++attempt) {
      for (double& v : windows[b].data()) v = rng.normal();
      if (clear_of_kinks(params, windows[b]) || attempt == kMaxResamples) break;
      ++result.input_resamples;
    }
  }
  std::vector<const Matrix*> batch;
  for (const auto& w : windows) batch.push_back(&w);

  ModelParams grads = ModelParams::zeros(config);
  batch_loss_and_gradient(params, batch, labels, grads, options.backward);

  for (std::size_t k = 0; k < params.tensors.size(); ++k) {
    auto& theta = params.tensors[k].data;
    for (std::size_t j = 0; j < theta.size(); ++j) {
      const double saved = theta[j];
      theta[j] = saved + options.step;
      const double up = batch_loss(params, batch, labels);
      theta[j] = saved - options.step;
      const double down = batch_loss(params, batch, labels);
      theta[j] = saved;
      const double numeric = (up - down) / (2.0 * options.step);
      const double err = relative_error(grads.tensors[k].data[j], numeric, options.denominator_floor);
      ++result.parameters_checked;
      if (err > result.max_relative_error) {
        result.max_relative_error = err;
        result.worst_tensor = params.tensors[k].name;
        result.worst_index = j;
      }
    }
  }
  return result;
}

}  // namespace vitalnet::nn
