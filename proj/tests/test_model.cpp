#include <gtest/gtest.h>

#include "test_support.hpp"
#include "vitalnet/error.hpp"
#include "vitalnet/nn/checkpoint.hpp"
#include "vitalnet/nn/grad_check.hpp"
#include "vitalnet/nn/model.hpp"

namespace vitalnet::nn {
namespace {

ModelConfig tiny_config() {
  ModelConfig c;
  c.input_len = 16;
  c.conv1_filters = 2;
  c.conv1_kernel = 3;
  c.conv2_filters = 2;
  c.conv2_kernel = 3;
  c.lstm_hidden = 4;
  return c;
}

Matrix random_window(std::uint64_t seed, std::size_t len = 48) {
  Rng rng(seed);
  Matrix m(len, kChannels);
  for (double& v : m.data()) v = rng.normal();
  return m;
}

TEST(ModelConfig, DefaultsAndValidation) {
  const ModelConfig c;
  EXPECT_NO_THROW(validate_config(c));
  // 48 -> conv5 -> 44 -> conv5 -> 40 -> pool 2/2 -> 20.
  EXPECT_EQ(c.sequence_len(), 20u);
  ModelConfig bad = c;
  bad.dense1_units = 50;
  EXPECT_THROW(validate_config(bad), ValidationError);
  bad = c;
  bad.input_len = 6;
  EXPECT_THROW(validate_config(bad), ValidationError);
  bad = c;
  bad.lstm_hidden = 0;
  EXPECT_THROW(validate_config(bad), ValidationError);
}

TEST(ModelConfig, JsonRoundTrip) {
  ModelConfig c = tiny_config();
  c.dense1_activation = Activation::tanh;
  EXPECT_EQ(model_config_from_json(to_json(c)), c);
  EXPECT_EQ(model_config_from_json(Json::object()), ModelConfig{});
  EXPECT_THROW(model_config_from_json(Json{{"conv_activation", "swish"}}), ValidationError);
}

TEST(ModelParams, ShapesAndCount) {
  const ModelParams p = ModelParams::zeros(ModelConfig{});
  ASSERT_EQ(p.tensors.size(), static_cast<std::size_t>(kTensorCount));
  EXPECT_EQ(p[kConv1Weight].shape, (std::vector<std::size_t>{32, 5, 3}));
  EXPECT_EQ(p[kLstmInput].shape, (std::vector<std::size_t>{256, 64}));
  EXPECT_EQ(p[kDense2Weight].name, "dense2.weight");
  EXPECT_EQ(p.parameter_count(), 512u + 10304u + 33024u + 6500u + 101u);
}

TEST(ModelParams, InitializationIsSeededAndBounded) {
  const ModelConfig c;
  const ModelParams a = ModelParams::initialize(c);
  EXPECT_EQ(a, ModelParams::initialize(c));
  ModelConfig other = c;
  other.seed = 2;
  EXPECT_NE(a, ModelParams::initialize(other));

  const double conv1_bound = 1.0 / std::sqrt(5.0 * 3.0);
  for (double v : a[kConv1Weight].data) EXPECT_LE(std::fabs(v), conv1_bound);
  const std::size_t H = c.lstm_hidden;
  for (std::size_t k = 0; k < H; ++k) EXPECT_EQ(a[kLstmBias].data[H + k], 1.0);
}

TEST(Forward, ZeroParamsGiveHalf) {
  const ModelParams p = ModelParams::zeros(ModelConfig{});
  for (std::uint64_t s = 0; s < 3; ++s) {
    const ForwardResult r = forward(p, random_window(s));
    EXPECT_EQ(r.probability, 0.5);
    ASSERT_EQ(r.features.size(), kFeatureUnits);
    for (double f : r.features) EXPECT_EQ(f, 0.0);
  }
}

TEST(Forward, DeterministicAndFeatureWidth) {
  for (const ModelConfig& c : {ModelConfig{}, tiny_config()}) {
    const ModelParams p = ModelParams::initialize(c);
    const Matrix w = random_window(9, c.input_len);
    const ForwardResult a = forward(p, w), b = forward(p, w);
    EXPECT_EQ(a.probability, b.probability);
    EXPECT_EQ(a.features, b.features);
    EXPECT_EQ(a.features.size(), 100u);
    EXPECT_GT(a.probability, 0.0);
    EXPECT_LT(a.probability, 1.0);
  }
}

TEST(Forward, RejectsWrongWindow) {
  const ModelParams p = ModelParams::initialize(ModelConfig{});
  EXPECT_THROW(forward(p, Matrix(47, 3)), ShapeError);
  EXPECT_THROW(forward(p, Matrix(48, 2)), ShapeError);
}

TEST(GradCheck, TinyConfig) {
  const GradCheckResult r = grad_check(tiny_config());
  EXPECT_LT(r.max_relative_error, 1e-6) << r.worst_tensor << "[" << r.worst_index << "]";
  EXPECT_EQ(r.parameters_checked, ModelParams::zeros(tiny_config()).parameter_count());
}

TEST(GradCheck, TinyConfigAcrossSeeds) {
  for (std::uint64_t seed : {21u, 22u, 23u}) {
    GradCheckOptions o;
    o.seed = seed;
    EXPECT_LT(grad_check(tiny_config(), o).max_relative_error, 1e-6) << "seed " << seed;
  }
}

TEST(GradCheck, UnitKernelsNoPooling) {
  ModelConfig c = tiny_config();
  c.conv1_kernel = 1;
  c.conv2_kernel = 1;
  c.pool_size = 1;
  c.pool_stride = 1;
  c.conv_activation = Activation::linear;
  // The network is smooth here, so a wider step trades negligible truncation
  // error for ten times less rounding noise.
  GradCheckOptions o;
  o.step = 1e-4;
  const GradCheckResult r = grad_check(c, o);
  EXPECT_LT(r.max_relative_error, 1e-7) << r.worst_tensor << "[" << r.worst_index << "]";
}

TEST(GradCheck, CatchesCorruptedBackward) {
  GradCheckOptions o;
  o.backward.flip_lstm_input_gradient = true;
  EXPECT_GT(grad_check(tiny_config(), o).max_relative_error, 1e-1);
}

TEST(RelativeError, Floor) {
  EXPECT_EQ(relative_error(1.0, 1.0, 1e-4), 0.0);
  EXPECT_DOUBLE_EQ(relative_error(2.0, 1.0, 1e-4), 0.5);
  EXPECT_DOUBLE_EQ(relative_error(0.0, 1e-9, 1e-4), 1e-5);
}

Checkpoint sample_checkpoint() {
  Checkpoint cp;
  cp.params = ModelParams::initialize(tiny_config());
  cp.channel_stats.mean = {80.0, 120.0, 60.0};
  cp.channel_stats.std = {12.5, 17.0, 8.25};
  cp.window_stride = 8;
  return cp;
}

TEST(Checkpoint, RoundTripIsBitIdentical) {
  const auto dir = testing::fresh_dir("checkpoint");
  const Checkpoint cp = sample_checkpoint();
  save_checkpoint(cp, dir / "m.json");
  const Checkpoint back = load_checkpoint(dir / "m.json");
  EXPECT_EQ(back.params, cp.params);
  EXPECT_EQ(back.channel_stats.std, cp.channel_stats.std);
  EXPECT_EQ(back.window_stride, 8u);
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Matrix w = random_window(s, 16);
    const ForwardResult a = forward(cp.params, w), b = forward(back.params, w);
    EXPECT_EQ(a.probability, b.probability);
    EXPECT_EQ(a.features, b.features);
  }
  save_checkpoint(back, dir / "again.json");
  EXPECT_EQ(testing::read_file(dir / "m.json"), testing::read_file(dir / "again.json"));
}

TEST(Checkpoint, RejectsMismatches) {
  const Json good = to_json(sample_checkpoint());
  Json doc = good;
  doc["format_version"] = 99;
  EXPECT_THROW(checkpoint_from_json(doc), ValidationError);
  doc = good;
  doc["tensors"][2]["name"] = "conv9.weight";
  EXPECT_THROW(checkpoint_from_json(doc), ValidationError);
  doc = good;
  doc["tensors"][0]["shape"] = {2, 3, 4};
  EXPECT_THROW(checkpoint_from_json(doc), ValidationError);
  doc = good;
  doc["tensors"][1]["data"].push_back(0.5);
  EXPECT_THROW(checkpoint_from_json(doc), ValidationError);
  doc = good;
  doc["tensors"].erase(doc["tensors"].size() - 1);
  EXPECT_THROW(checkpoint_from_json(doc), ValidationError);
  doc = good;
  doc.erase("normalization");
  EXPECT_THROW(checkpoint_from_json(doc), ValidationError);
}

}  // namespace
}  // namespace vitalnet::nn
