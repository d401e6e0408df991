#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include "json.hpp"

namespace vitalnet {

using Json = nlohmann::json;

Json load_json(const std::filesystem::path& path);
void save_json(const Json& doc, const std::filesystem::path& path);

// Applies a flat `key=value` override. Dots in the key descend into objects
// (`labels.positive.resting_hr=50`). The value is parsed as JSON when possible
// and taken as a string otherwise. Unknown keys are rejected.
void apply_override(Json& doc, std::string_view assignment);
void apply_overrides(Json& doc, std::span<const std::string> assignments);

}  // namespace vitalnet
