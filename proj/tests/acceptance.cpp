// Acceptance battery: one PASS/FAIL line per criterion, exit status 1 on any
// failure. Optional arguments select criteria by number.
#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <string>
#include <thread>

#include "maser/validation.hpp"

int main(int argc, char** argv) {
  maser::ValidationOptions options;
  options.threads = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("MASER_LDP_THREADS")) options.threads = std::max(1, std::atoi(env));
  for (int i = 1; i < argc; ++i) options.only.push_back(std::stoi(argv[i]));

  int failed = 0;
  int total = 0;
  for (int id = 1; id <= maser::kCriterionCount; ++id) {
    if (!options.only.empty() &&
        std::find(options.only.begin(), options.only.end(), id) == options.only.end())
      continue;
    const auto result = maser::run_criterion(id, options);
    std::cout << maser::format_result(result) << std::endl;
    ++total;
    if (!result.passed) ++failed;
  }
  std::cout << (total - failed) << "/" << total << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
