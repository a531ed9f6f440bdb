#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "cli/config.hpp"

namespace maser::cli {

/// Exit statuses.
enum ExitCode : int { kSuccess = 0, kUsageError = 1, kNumericalError = 2 };

/// Subcommand names accepted by run().
const std::vector<std::string>& command_names();

/// One-line description per subcommand.
std::string command_help(const std::string& name);

/// Runs config.command, writing CSV files under config.out. Progress and
/// the list of written files go to `log`, problems to `err`. Tables are
/// always written, with complete=false when a grid point failed.
int run(const RunConfig& config, std::ostream& log, std::ostream& err);

}  // namespace maser::cli
