#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>

namespace vitalnet::cli {

inline constexpr std::string_view kVersion = "0.1.0";

// Exit codes returned by run().
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitUsage = 2;

// Runs one subcommand. `args` excludes the program name.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace vitalnet::cli
