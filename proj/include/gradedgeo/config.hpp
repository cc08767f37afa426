#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace gradedgeo {

/// Invalid configuration; the message names the offending field.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Subcommands of the command-line tool.
const std::vector<std::string>& command_names();

/// Validated run configuration with all defaults filled in.
struct RunConfig {
  std::string command;
  std::string problem = "flat";
  nlohmann::json params = nlohmann::json::object();  ///< problem parameters
  double rtol = 1e-9;
  double atol = 1e-12;
  std::uint64_t seed = 42;
  std::string out;  ///< directory for CSV artifacts; empty disables them
  bool pretty = false;
  nlohmann::json args = nlohmann::json::object();  ///< subcommand parameters

  nlohmann::json to_json() const;
};

/// Validates a configuration document:
///   {"command", "problem": id | {"id", "params"}, "rtol", "atol", "seed",
///    "out", "pretty", "levels", "driving_level", "args": {...}}
/// Unknown keys are rejected at every level, the problem is built once to
/// check its parameters (including grading), and subcommand defaults are
/// filled in. Throws ConfigError.
RunConfig parse_config(const nlohmann::json& doc);

/// Reads and parses a JSON configuration file.
RunConfig load_config(const std::string& path);

}  // namespace gradedgeo
