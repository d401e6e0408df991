#include "vitalnet/nn/checkpoint.hpp"

#include <fstream>

#include "vitalnet/error.hpp"

namespace vitalnet::nn {

Json to_json(const Checkpoint& checkpoint) {
  Json doc;
  doc["format_version"] = kCheckpointFormatVersion;
  doc["model_config"] = to_json(checkpoint.params.config);
  doc["normalization"] = {{"mean", checkpoint.channel_stats.mean}, {"std", checkpoint.channel_stats.std}};
  doc["window_stride"] = checkpoint.window_stride;
  doc["tensors"] = Json::array();
  for (const auto& t : checkpoint.params.tensors) {
    doc["tensors"].push_back({{"name", t.name}, {"shape", t.shape}, {"data", t.data}});
  }
  return doc;
}

Checkpoint checkpoint_from_json(const Json& doc) {
  if (!doc.contains("format_version") || !doc["format_version"].is_number_integer() ||
      doc["format_version"].get<int>() != kCheckpointFormatVersion) {
    throw ValidationError("checkpoint: unsupported format_version (expected " +
                          std::to_string(kCheckpointFormatVersion) + ")");
  }
  Checkpoint cp;
  try {
    cp.params = ModelParams::zeros(model_config_from_json(doc.at("model_config")));
    const auto& norm = doc.at("normalization");
    cp.channel_stats.mean = norm.at("mean").get<std::array<double, kChannels>>();
    cp.channel_stats.std = norm.at("std").get<std::array<double, kChannels>>();
    cp.window_stride = doc.at("window_stride").get<std::size_t>();

    const auto& tensors = doc.at("tensors");
    if (tensors.size() != cp.params.tensors.size()) throw ValidationError("checkpoint: wrong number of tensors");
    for (std::size_t k = 0; k < tensors.size(); ++k) {
      auto& expected = cp.params.tensors[k];
      const auto& t = tensors[k];
      if (t.at("name").get<std::string>() != expected.name) {
        throw ValidationError("checkpoint: tensor " + std::to_string(k) + " should be " + expected.name);
      }
      if (t.at("shape").get<std::vector<std::size_t>>() != expected.shape) {
        throw ValidationError("checkpoint: shape of " + expected.name + " does not match model_config");
      }
      auto data = t.at("data").get<std::vector<double>>();
      if (data.size() != expected.data.size()) throw ValidationError("checkpoint: data length of " + expected.name);
      expected.data = std::move(data);
    }
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("checkpoint: ") + e.what());
  }
  return cp;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  save_json(to_json(checkpoint), path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return checkpoint_from_json(load_json(path)); }

}  // namespace vitalnet::nn
