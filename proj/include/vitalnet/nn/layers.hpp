#pragma once

// Forward and backward kernels for the fixed conv -> conv -> pool -> LSTM ->
// dense -> dense network. Sequences are T x C matrices (time along rows).
// Backward functions accumulate (+=) into parameter gradients and overwrite
// input gradients.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "vitalnet/matrix.hpp"

namespace vitalnet::nn {

enum class Activation { linear, relu, sigmoid, tanh };

Activation activation_from_string(std::string_view name);
std::string_view to_string(Activation a);

double activate(Activation a, double pre);
// Derivative of the activation, given both its input and output.
double activate_derivative(Activation a, double pre, double post);

double sigmoid(double x);

// Weights are laid out [filter][tap][channel].
struct ConvShape {
  std::size_t filters = 0;
  std::size_t kernel = 0;
  std::size_t channels = 0;
};

// Valid cross-correlation along time, before activation: (T - K + 1) x F.
Matrix conv1d_pre(const Matrix& input, std::span<const double> weight, std::span<const double> bias,
                  const ConvShape& shape);
Matrix conv1d_apply(const Matrix& input, std::span<const double> weight, std::span<const double> bias,
                    const ConvShape& shape, Activation act = Activation::relu);
// `d_pre` is the gradient w.r.t. the pre-activation output. `d_input` may be
// null when the input gradient is not needed.
void conv1d_backward(const Matrix& input, std::span<const double> weight, const ConvShape& shape,
                     const Matrix& d_pre, std::span<double> d_weight, std::span<double> d_bias,
                     Matrix* d_input);

struct PoolResult {
  Matrix output;
  std::vector<std::size_t> argmax;  // source row per output cell, row-major like output
};

// Per-channel max over windows of `size` rows advanced by `stride`. Ties go to
// the earliest row.
PoolResult maxpool1d(const Matrix& input, std::size_t size, std::size_t stride);
Matrix maxpool1d_backward(const Matrix& d_output, const std::vector<std::size_t>& argmax,
                          std::size_t input_rows);

// Gate blocks are stacked i, f, g, o along the 4H rows of w_ih [4H x In],
// w_hh [4H x H] and bias [4H].
struct LstmWeights {
  std::span<const double> w_ih;
  std::span<const double> w_hh;
  std::span<const double> bias;
  std::size_t input = 0;
  std::size_t hidden = 0;
};

struct LstmGradients {
  std::span<double> w_ih;
  std::span<double> w_hh;
  std::span<double> bias;
};

struct LstmState {
  std::vector<double> h;
  std::vector<double> c;
};

// Gate activations and outputs of one step, kept for backpropagation.
struct LstmStep {
  std::vector<double> i, f, g, o;
  std::vector<double> c;       // c'
  std::vector<double> tanh_c;  // tanh(c')
  std::vector<double> h;       // h'
};

LstmStep lstm_step(std::span<const double> x, std::span<const double> h, std::span<const double> c,
                   const LstmWeights& w);

// On entry dh/dc hold dL/dh' and dL/dc'; on exit dL/dh and dL/dc of the
// previous state. dx receives dL/dx.
void lstm_step_backward(const LstmStep& step, std::span<const double> x, std::span<const double> h_prev,
                        std::span<const double> c_prev, const LstmWeights& w, std::vector<double>& dh,
                        std::vector<double>& dc, const LstmGradients& grads, std::span<double> dx);

// W is [out x in].
std::vector<double> dense_pre(std::span<const double> x, std::span<const double> weight,
                              std::span<const double> bias, std::size_t out);
std::vector<double> dense_apply(std::span<const double> x, std::span<const double> weight,
                                std::span<const double> bias, std::size_t out, Activation act);
void dense_backward(std::span<const double> x, std::span<const double> weight, std::span<const double> d_pre,
                    std::span<double> d_weight, std::span<double> d_bias, std::span<double> dx);

// Binary cross-entropy on a probability clamped to [1e-7, 1 - 1e-7].
inline constexpr double kProbabilityClamp = 1e-7;
double bce_loss(double p, int y);
// dL/dp of the clamped loss (zero where the clamp is active).
double bce_grad(double p, int y);

}  // namespace vitalnet::nn
