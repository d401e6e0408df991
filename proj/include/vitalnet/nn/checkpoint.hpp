#pragma once

#include <filesystem>

#include "vitalnet/config.hpp"
#include "vitalnet/data_model.hpp"
#include "vitalnet/nn/model.hpp"

namespace vitalnet::nn {

inline constexpr int kCheckpointFormatVersion = 1;

// A trained model plus the preprocessing it was trained with.
struct Checkpoint {
  ModelParams params;
  ChannelStats channel_stats;
  std::size_t window_stride = 24;
};

Json to_json(const Checkpoint& checkpoint);
Checkpoint checkpoint_from_json(const Json& doc);
void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace vitalnet::nn
