#include "vitalnet/nn/layers.hpp"

#include <algorithm>
#include <cmath>

#include "vitalnet/error.hpp"

namespace vitalnet::nn {

Activation activation_from_string(std::string_view name) {
  if (name == "linear") return Activation::linear;
  if (name == "relu") return Activation::relu;
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "tanh") return Activation::tanh;
  throw ValidationError("unknown activation '" + std::string(name) + "'");
}

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::linear: return "linear";
    case Activation::relu: return "relu";
    case Activation::sigmoid: return "sigmoid";
    case Activation::tanh: return "tanh";
  }
  return "linear";
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double activate(Activation a, double pre) {
  switch (a) {
    case Activation::linear: return pre;
    case Activation::relu: return pre > 0.0 ? pre : 0.0;
    case Activation::sigmoid: return sigmoid(pre);
    case Activation::tanh: return std::tanh(pre);
  }
  return pre;
}

double activate_derivative(Activation a, double pre, double post) {
  switch (a) {
    case Activation::linear: return 1.0;
    case Activation::relu: return pre > 0.0 ? 1.0 : 0.0;
    case Activation::sigmoid: return post * (1.0 - post);
    case Activation::tanh: return 1.0 - post * post;
  }
  return 1.0;
}

Matrix conv1d_pre(const Matrix& input, std::span<const double> weight, std::span<const double> bias,
                  const ConvShape& shape) {
  if (input.cols() != shape.channels) {
    throw ShapeError("conv1d: input has " + std::to_string(input.cols()) + " channels, expected " +
                     std::to_string(shape.channels));
  }
  if (input.rows() < shape.kernel) {
    throw ShapeError("conv1d: sequence length " + std::to_string(input.rows()) + " shorter than kernel " +
                     std::to_string(shape.kernel));
  }
  const std::size_t span = shape.kernel * shape.channels;
  if (weight.size() != shape.filters * span || bias.size() != shape.filters) {
    throw ShapeError("conv1d: weight or bias size does not match shape");
  }
  const std::size_t out_rows = input.rows() - shape.kernel + 1;
  Matrix out(out_rows, shape.filters);
  const double* in = input.data().data();
  for (std::size_t t = 0; t < out_rows; ++t) {
    // Rows t..t+K-1 are contiguous, matching the [tap][channel] weight layout.
    const double* patch = in + t * shape.channels;
    for (std::size_t f = 0; f < shape.filters; ++f) {
      const double* w = weight.data() + f * span;
      double acc = bias[f];
      for (std::size_t j = 0; j < span; ++j) acc += w[j] * patch[j];
      out(t, f) = acc;
    }
  }
  return out;
}

Matrix conv1d_apply(const Matrix& input, std::span<const double> weight, std::span<const double> bias,
                    const ConvShape& shape, Activation act) {
  Matrix out = conv1d_pre(input, weight, bias, shape);
  for (double& v : out.data()) v = activate(act, v);
  return out;
}

void conv1d_backward(const Matrix& input, std::span<const double> weight, const ConvShape& shape,
                     const Matrix& d_pre, std::span<double> d_weight, std::span<double> d_bias,
                     Matrix* d_input) {
  const std::size_t span = shape.kernel * shape.channels;
  const double* in = input.data().data();
  if (d_input) *d_input = Matrix(input.rows(), input.cols());
  double* d_in = d_input ? d_input->data().data() : nullptr;
  for (std::size_t t = 0; t < d_pre.rows(); ++t) {
    const double* patch = in + t * shape.channels;
    for (std::size_t f = 0; f < shape.filters; ++f) {
      const double g = d_pre(t, f);
      if (g == 0.0) continue;
      d_bias[f] += g;
      double* dw = d_weight.data() + f * span;
      for (std::size_t j = 0; j < span; ++j) dw[j] += g * patch[j];
      if (d_in) {
        const double* w = weight.data() + f * span;
        double* d_patch = d_in + t * shape.channels;
        for (std::size_t j = 0; j < span; ++j) d_patch[j] += g * w[j];
      }
    }
  }
}

PoolResult maxpool1d(const Matrix& input, std::size_t size, std::size_t stride) {
  if (size < 1 || stride < 1) throw ShapeError("maxpool1d: size and stride must be at least 1");
  if (input.rows() < size) {
    throw ShapeError("maxpool1d: sequence length " + std::to_string(input.rows()) + " shorter than pool size " +
                     std::to_string(size));
  }
  const std::size_t out_rows = (input.rows() - size) / stride + 1;
  PoolResult r{Matrix(out_rows, input.cols()), std::vector<std::size_t>(out_rows * input.cols())};
  for (std::size_t p = 0; p < out_rows; ++p) {
    for (std::size_t c = 0; c < input.cols(); ++c) {
      std::size_t best = p * stride;
      for (std::size_t t = best + 1; t < p * stride + size; ++t) {
        if (input(t, c) > input(best, c)) best = t;
      }
      r.output(p, c) = input(best, c);
      r.argmax[p * input.cols() + c] = best;
    }
  }
  return r;
}

Matrix maxpool1d_backward(const Matrix& d_output, const std::vector<std::size_t>& argmax, std::size_t input_rows) {
  Matrix d_input(input_rows, d_output.cols());
  for (std::size_t p = 0; p < d_output.rows(); ++p) {
    for (std::size_t c = 0; c < d_output.cols(); ++c) {
      d_input(argmax[p * d_output.cols() + c], c) += d_output(p, c);
    }
  }
  return d_input;
}

LstmStep lstm_step(std::span<const double> x, std::span<const double> h, std::span<const double> c,
                   const LstmWeights& w) {
  const std::size_t H = w.hidden;
  const std::size_t In = w.input;
  if (x.size() != In || h.size() != H || c.size() != H || w.w_ih.size() != 4 * H * In ||
      w.w_hh.size() != 4 * H * H || w.bias.size() != 4 * H) {
    throw ShapeError("lstm_step: inconsistent shapes");
  }
  std::vector<double> z(4 * H);
  for (std::size_t r = 0; r < 4 * H; ++r) {
    double acc = w.bias[r];
    const double* wi = w.w_ih.data() + r * In;
    for (std::size_t j = 0; j < In; ++j) acc += wi[j] * x[j];
    const double* wh = w.w_hh.data() + r * H;
    for (std::size_t j = 0; j < H; ++j) acc += wh[j] * h[j];
    z[r] = acc;
  }
  LstmStep s;
  s.i.resize(H);
  s.f.resize(H);
  s.g.resize(H);
  s.o.resize(H);
  s.c.resize(H);
  s.tanh_c.resize(H);
  s.h.resize(H);
  for (std::size_t k = 0; k < H; ++k) {
    s.i[k] = sigmoid(z[k]);
    s.f[k] = sigmoid(z[H + k]);
    s.g[k] = std::tanh(z[2 * H + k]);
    s.o[k] = sigmoid(z[3 * H + k]);
    s.c[k] = s.f[k] * c[k] + s.i[k] * s.g[k];
    s.tanh_c[k] = std::tanh(s.c[k]);
    s.h[k] = s.o[k] * s.tanh_c[k];
  }
  return s;
}

void lstm_step_backward(const LstmStep& step, std::span<const double> x, std::span<const double> h_prev,
                        std::span<const double> c_prev, const LstmWeights& w, std::vector<double>& dh,
                        std::vector<double>& dc, const LstmGradients& grads, std::span<double> dx) {
  const std::size_t H = w.hidden;
  const std::size_t In = w.input;
  std::vector<double> dz(4 * H);
  for (std::size_t k = 0; k < H; ++k) {
    const double d_o = dh[k] * step.tanh_c[k];
    const double d_c = dc[k] + dh[k] * step.o[k] * (1.0 - step.tanh_c[k] * step.tanh_c[k]);
    const double d_i = d_c * step.g[k];
    const double d_g = d_c * step.i[k];
    const double d_f = d_c * c_prev[k];
    dc[k] = d_c * step.f[k];
    dz[k] = d_i * step.i[k] * (1.0 - step.i[k]);
    dz[H + k] = d_f * step.f[k] * (1.0 - step.f[k]);
    dz[2 * H + k] = d_g * (1.0 - step.g[k] * step.g[k]);
    dz[3 * H + k] = d_o * step.o[k] * (1.0 - step.o[k]);
  }
  std::fill(dh.begin(), dh.end(), 0.0);
  std::fill(dx.begin(), dx.end(), 0.0);
  for (std::size_t r = 0; r < 4 * H; ++r) {
    const double g = dz[r];
    grads.bias[r] += g;
    double* gwi = grads.w_ih.data() + r * In;
    const double* wi = w.w_ih.data() + r * In;
    for (std::size_t j = 0; j < In; ++j) {
      gwi[j] += g * x[j];
      dx[j] += g * wi[j];
    }
    double* gwh = grads.w_hh.data() + r * H;
    const double* wh = w.w_hh.data() + r * H;
    for (std::size_t j = 0; j < H; ++j) {
      gwh[j] += g * h_prev[j];
      dh[j] += g * wh[j];
    }
  }
}

std::vector<double> dense_pre(std::span<const double> x, std::span<const double> weight,
                              std::span<const double> bias, std::size_t out) {
  if (weight.size() != out * x.size() || bias.size() != out) throw ShapeError("dense: inconsistent shapes");
  std::vector<double> y(out);
  for (std::size_t r = 0; r < out; ++r) {
    double acc = bias[r];
    const double* w = weight.data() + r * x.size();
    for (std::size_t j = 0; j < x.size(); ++j) acc += w[j] * x[j];
    y[r] = acc;
  }
  return y;
}

std::vector<double> dense_apply(std::span<const double> x, std::span<const double> weight,
                                std::span<const double> bias, std::size_t out, Activation act) {
  auto y = dense_pre(x, weight, bias, out);
  for (double& v : y) v = activate(act, v);
  return y;
}

void dense_backward(std::span<const double> x, std::span<const double> weight, std::span<const double> d_pre,
                    std::span<double> d_weight, std::span<double> d_bias, std::span<double> dx) {
  std::fill(dx.begin(), dx.end(), 0.0);
  for (std::size_t r = 0; r < d_pre.size(); ++r) {
    const double g = d_pre[r];
    d_bias[r] += g;
    double* dw = d_weight.data() + r * x.size();
    const double* w = weight.data() + r * x.size();
    for (std::size_t j = 0; j < x.size(); ++j) {
      dw[j] += g * x[j];
      if (!dx.empty()) dx[j] += g * w[j];
    }
  }
}

double bce_loss(double p, int y) {
  const double q = std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp);
  return y == 1 ? -std::log(q) : -std::log(1.0 - q);
}

double bce_grad(double p, int y) {
  if (p < kProbabilityClamp || p > 1.0 - kProbabilityClamp) return 0.0;
  return y == 1 ? -1.0 / p : 1.0 / (1.0 - p);
}

}  // namespace vitalnet::nn
