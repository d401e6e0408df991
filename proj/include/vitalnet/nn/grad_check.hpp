#pragma once

#include <cstdint>
#include <string>

#include "vitalnet/nn/model.hpp"

namespace vitalnet::nn {

struct GradCheckOptions {
  double step = 1e-5;
  std::size_t batch_size = 4;
  std::uint64_t seed = 11;
  // Relative errors use max(|analytic|, |numeric|, floor) as denominator, so
  // gradients below the floor are compared on an absolute scale. Central
  // differences at step 1e-5 carry roughly 1e-11 of rounding noise.
  double denominator_floor = 1e-4;
  BackwardOptions backward;  // set a mutation to self-test the harness
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_tensor;
  std::size_t worst_index = 0;
  std::size_t parameters_checked = 0;
  std::size_t input_resamples = 0;  // batches redrawn to keep clear of kinks and ties
};

// Compares the analytic gradient of mean BCE on a random mini-batch with
// central differences on every parameter.
GradCheckResult grad_check(const ModelConfig& config, const GradCheckOptions& options = {});

double relative_error(double analytic, double numeric, double floor);

}  // namespace vitalnet::nn
