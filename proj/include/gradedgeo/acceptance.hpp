#pragma once

#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace gradedgeo {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;

  /// Without the timing, so summaries stay reproducible.
  nlohmann::json to_json() const;
  /// "[PASS] 01 title: detail (0.12 s)".
  std::string line() const;
};

/// Runs the acceptance criteria in order; `on_result` is called as each finishes.
std::vector<CriterionResult> run_acceptance(const std::function<void(const CriterionResult&)>& on_result = {});

}  // namespace gradedgeo
