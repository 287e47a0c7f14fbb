#pragma once

// The acceptance suite: eleven end-to-end checks with runtime limits.

#include <functional>
#include <ostream>
#include <string>
#include <vector>

namespace gwldp::verify {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  double limit = 0.0;  // seconds; exceeding it fails the criterion
};

struct AcceptanceOptions {
  /// Criterion ids to run; empty means all.
  std::vector<int> only;
  unsigned threads = 1;
};

struct Criterion {
  int id;
  std::string name;
  double limit;
  /// Returns pass/fail and fills `detail`.
  std::function<bool(std::string& detail, const AcceptanceOptions&)> run;
};

const std::vector<Criterion>& acceptance_criteria();

/// Runs the selected criteria in id order. Exceptions count as failures.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options = {});

/// One line per criterion: "PASS AC3 name (1.234 s / 10 s): detail". The
/// timing part is left out when `with_times` is false.
void print_results(std::ostream& out, const std::vector<CriterionResult>& results, bool with_times = true);

}  // namespace gwldp::verify
