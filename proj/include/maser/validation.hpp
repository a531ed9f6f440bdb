#pragma once

#include <string>
#include <vector>

namespace maser {

/// Outcome of one acceptance criterion.
struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  /// Extra lines printed under the verdict; never affect `passed`.
  std::vector<std::string> notes;
};

struct ValidationOptions {
  unsigned threads = 1;
  /// Criteria to run (1..13); empty runs all of them.
  std::vector<int> only;
};

/// Number of acceptance criteria.
constexpr int kCriterionCount = 13;

/// Runs a single criterion. Exceptions raised by the numerics are caught and
/// turned into a failed result.
CriterionResult run_criterion(int id, const ValidationOptions& options = {});

/// Runs the selected criteria in ascending order.
std::vector<CriterionResult> run_acceptance(const ValidationOptions& options = {});

/// "PASS  3  name  detail  (0.12 s)" plus indented notes.
std::string format_result(const CriterionResult& result);

}  // namespace maser
