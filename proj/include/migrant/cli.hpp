#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

#include "migrant/families.hpp"

namespace migrant {

inline constexpr const char* kToolkitVersion = "1.0.0";

/// Exit codes of the command-line tool.
enum ExitCode : int { exit_ok = 0, exit_check_failed = 1, exit_config_error = 2 };

/// Malformed, incomplete or unknown configuration. Maps to exit_config_error.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// {"kind": "power_law", "a": 1.5} and friends. Unknown keys are errors.
ThinningFamily family_from_json(const nlohmann::json& record);
nlohmann::json family_to_json(const ThinningFamily& family);

/// 64-bit FNV-1a.
std::uint64_t fnv1a_64(std::string_view bytes);

/// Entry point of `migrant-chain`; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace migrant
