#pragma once

// The acceptance checks shared by the acceptance test binary and the
// `paper-check` subcommand.

#include <functional>
#include <string>
#include <vector>

namespace rpf {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

/// Runs criteria 1..9 in order. `on_result` (if set) is called as each finishes.
std::vector<CriterionResult> run_acceptance(const std::function<void(const CriterionResult&)>& on_result = {});

/// One formatted line: "[PASS] 3 title: detail (1.23 s)".
std::string format_result(const CriterionResult& r);

}  // namespace rpf
