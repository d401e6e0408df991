#include "vitalnet/config.hpp"

#include <fstream>

#include "vitalnet/error.hpp"

namespace vitalnet {

Json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ParseError(0, path.string() + ": " + e.what());
  }
}

void save_json(const Json& doc, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

void apply_override(Json& doc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ValidationError("override must look like key=value: '" + std::string(assignment) + "'");
  }
  const std::string key(assignment.substr(0, eq));
  const std::string text(assignment.substr(eq + 1));

  Json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!node->is_object() || !node->contains(part)) {
      throw ValidationError("unknown config key '" + key + "'");
    }
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }

  Json value = Json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (value.is_discarded()) value = text;
  *node = std::move(value);
}

void apply_overrides(Json& doc, std::span<const std::string> assignments) {
  for (const auto& a : assignments) apply_override(doc, a);
}

}  // namespace vitalnet
