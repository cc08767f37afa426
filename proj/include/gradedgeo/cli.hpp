#pragma once

#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gradedgeo/config.hpp"

namespace gradedgeo {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  exit_ok = 0,
  exit_check_failed = 1,
  exit_usage = 2,
  exit_numerical = 3,
};

struct CommandOutcome {
  int exit_code = exit_ok;
  nlohmann::json summary;              ///< deterministic for a fixed config
  std::vector<std::string> artifacts;  ///< files written under cfg.out
};

/// Runs one subcommand. Numerical failures map to exit_numerical and usage
/// errors (bad points, levels, arguments) to exit_usage; both carry an
/// "error" object with a machine-readable "reason" in the summary.
/// `progress` receives human-readable lines (selftest criteria).
CommandOutcome run_command(const RunConfig& cfg, const std::function<void(const std::string&)>& progress = {});

/// Full output document: {"envelope": {...}, "header": {"config": ...},
/// "summary": ..., "exit_code": ...}. Only the envelope varies between runs.
nlohmann::json output_document(const RunConfig& cfg, const CommandOutcome& outcome, double seconds);

/// "path = value" lines of a JSON document.
std::string render_pretty(const nlohmann::json& doc);

}  // namespace gradedgeo
