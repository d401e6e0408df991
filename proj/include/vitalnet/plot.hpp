#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

namespace vitalnet::plot {

enum class Kind { sweep, history, embedding, boxplot };

Kind kind_from_string(std::string_view name);
// Header the input CSV must carry for a given kind.
std::string_view expected_header(Kind kind);

// Renders a fixed 800x600 SVG from CSV text. Throws ValidationError naming the
// expected header on schema mismatch.
std::string render(Kind kind, std::istream& csv);
void render_file(Kind kind, const std::filesystem::path& input, const std::filesystem::path& output);

}  // namespace vitalnet::plot
