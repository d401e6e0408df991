#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "vitalnet/config.hpp"
#include "vitalnet/data_model.hpp"
#include "vitalnet/nn/model.hpp"

namespace vitalnet::nn {

struct TrainConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t batch_size = 32;
  std::size_t epochs = 30;
  std::uint64_t seed = 7;
};

void validate_config(const TrainConfig& config);
Json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const Json& doc);

// First and second moment estimates, one buffer per parameter tensor.
struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
};

// One bias-corrected Adam update at step t >= 1. Throws if a gradient is not
// finite, naming the tensor.
void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state, std::size_t t,
               const TrainConfig& config);

struct EpochStats {
  std::size_t epoch = 0;
  double loss = 0.0;      // mean batch loss over the epoch
  double accuracy = 0.0;  // share of windows classified correctly before each update
};

struct TrainResult {
  ModelParams params;
  std::vector<EpochStats> history;
};

TrainResult train(const WindowedDataset& train_set, const ModelConfig& model_config,
                  const TrainConfig& train_config);

// CSV: epoch,loss,accuracy
void write_history(const std::vector<EpochStats>& history, std::ostream& out);

}  // namespace vitalnet::nn
