#include "vitalnet/nn/train.hpp"

#include <cmath>
#include <numeric>
#include <ostream>

#include "vitalnet/error.hpp"
#include "vitalnet/rng.hpp"
#include "vitalnet/stats.hpp"

namespace vitalnet::nn {

void validate_config(const TrainConfig& c) {
  if (!(c.learning_rate > 0.0)) throw ValidationError("train config: learning_rate must be positive");
  if (!(c.beta1 > 0.0 && c.beta1 < 1.0) || !(c.beta2 > 0.0 && c.beta2 < 1.0)) {
    throw ValidationError("train config: beta1 and beta2 must lie in (0, 1)");
  }
  if (!(c.epsilon > 0.0)) throw ValidationError("train config: epsilon must be positive");
  if (c.batch_size < 1) throw ValidationError("train config: batch_size must be at least 1");
}

Json to_json(const TrainConfig& c) {
  return Json{{"learning_rate", c.learning_rate}, {"beta1", c.beta1},           {"beta2", c.beta2},
              {"epsilon", c.epsilon},             {"batch_size", c.batch_size}, {"epochs", c.epochs},
              {"seed", c.seed}};
}

TrainConfig train_config_from_json(const Json& doc) {
  TrainConfig c;
  try {
    c.learning_rate = doc.value("learning_rate", c.learning_rate);
    c.beta1 = doc.value("beta1", c.beta1);
    c.beta2 = doc.value("beta2", c.beta2);
    c.epsilon = doc.value("epsilon", c.epsilon);
    c.batch_size = doc.value("batch_size", c.batch_size);
    c.epochs = doc.value("epochs", c.epochs);
    c.seed = doc.value("seed", c.seed);
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("train config: ") + e.what());
  }
  validate_config(c);
  return c;
}

void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state, std::size_t t,
               const TrainConfig& config) {
  if (t < 1) throw ValidationError("adam_step: step counter starts at 1");
  if (grads.tensors.size() != params.tensors.size()) throw ShapeError("adam_step: gradient tensor count mismatch");
  if (state.m.empty()) {
    for (const auto& tensor : params.tensors) {
      state.m.emplace_back(tensor.data.size(), 0.0);
      state.v.emplace_back(tensor.data.size(), 0.0);
    }
  }
  for (std::size_t k = 0; k < params.tensors.size(); ++k) {
    const auto& g = grads.tensors[k].data;
    if (g.size() != params.tensors[k].data.size()) throw ShapeError("adam_step: shape mismatch in " + params.tensors[k].name);
    for (double v : g) {
      if (!std::isfinite(v)) throw ValidationError("adam_step: non-finite gradient in " + params.tensors[k].name);
    }
  }

  const double td = static_cast<double>(t);
  const double correction1 = 1.0 - std::pow(config.beta1, td);
  const double correction2 = 1.0 - std::pow(config.beta2, td);
  for (std::size_t k = 0; k < params.tensors.size(); ++k) {
    auto& theta = params.tensors[k].data;
    const auto& g = grads.tensors[k].data;
    auto& m = state.m[k];
    auto& v = state.v[k];
    for (std::size_t j = 0; j < theta.size(); ++j) {
      m[j] = config.beta1 * m[j] + (1.0 - config.beta1) * g[j];
      v[j] = config.beta2 * v[j] + (1.0 - config.beta2) * g[j] * g[j];
      const double m_hat = m[j] / correction1;
      const double v_hat = v[j] / correction2;
      theta[j] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
  }
}

TrainResult train(const WindowedDataset& train_set, const ModelConfig& model_config,
                  const TrainConfig& train_config) {
  validate_config(train_config);
  if (train_set.empty()) throw ValidationError("train: empty training set");
  std::array<std::size_t, 2> per_label{};
  for (const auto& w : train_set.windows) ++per_label[w.label == 1];
  if (per_label[0] == 0 || per_label[1] == 0) throw ValidationError("train: training set has a single class");
  if (train_set.window_len != model_config.input_len) {
    throw ShapeError("train: windows have " + std::to_string(train_set.window_len) + " slots, model expects " +
                     std::to_string(model_config.input_len));
  }

  TrainResult result{ModelParams::initialize(model_config), {}};
  ModelParams& params = result.params;
  ModelParams grads = ModelParams::zeros(model_config);
  AdamState adam;
  Rng rng(train_config.seed);

  const std::size_t n = train_set.size();
  std::vector<std::size_t> order(n);
  ForwardCache cache;
  std::size_t step = 0;
  for (std::size_t epoch = 1; epoch <= train_config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(order));

    double loss_sum = 0.0;
    std::size_t batches = 0, correct = 0;
    for (std::size_t begin = 0; begin < n; begin += train_config.batch_size) {
      const std::size_t end = std::min(n, begin + train_config.batch_size);
      const double scale = 1.0 / static_cast<double>(end - begin);
      grads.set_zero();
      double batch_loss = 0.0;
      for (std::size_t b = begin; b < end; ++b) {
        const auto& w = train_set.windows[order[b]];
        const double p = forward(params, w.values, cache).probability;
        batch_loss += bce_loss(p, w.label);
        correct += static_cast<int>(p >= 0.5) == w.label;
        backward(params, w.values, cache, bce_grad(p, w.label) * p * (1.0 - p) * scale, grads);
      }
      adam_step(params, grads, adam, ++step, train_config);
      loss_sum += batch_loss * scale;
      ++batches;
    }
    result.history.push_back(
        {epoch, loss_sum / static_cast<double>(batches), static_cast<double>(correct) / static_cast<double>(n)});
  }
  return result;
}

void write_history(const std::vector<EpochStats>& history, std::ostream& out) {
  out << "epoch,loss,accuracy\n";
  for (const auto& e : history) {
    out << e.epoch << ',' << format_fixed(e.loss, 9) << ',' << format_fixed(e.accuracy, 6) << '\n';
  }
}

}  // namespace vitalnet::nn
