#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cli/commands.hpp"
#include "cli/config.hpp"

int main(int argc, char** argv) {
  using namespace maser::cli;

  CLI::App app{"Full counting statistics of the atom maser"};
  app.set_version_flag("--version", MASER_LDP_VERSION);
  app.require_subcommand(1);

  std::string config_file;
  std::vector<std::string> overrides;
  std::string out_dir;
  std::uint64_t seed = 0;
  long long threads = -1;

  for (const auto& name : command_names()) {
    auto* sub = app.add_subcommand(name, command_help(name));
    sub->add_option("--config", config_file, "flat key = value config file");
    sub->add_option("--set", overrides, "override one key (key=value), repeatable");
    sub->add_option("--out", out_dir, "output directory for CSV files");
    sub->add_option("--seed", seed, "base seed for trajectories");
    sub->add_option("--threads", threads, "worker threads (0: MASER_LDP_THREADS or 1)")
        ->check(CLI::NonNegativeNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  RunConfig config;
  try {
    config.command = app.get_subcommands().front()->get_name();
    if (!config_file.empty()) apply_file(config, config_file);
    for (const auto& o : overrides) apply_override(config, o);
    auto* sub = app.get_subcommands().front();
    if (!out_dir.empty()) config.out = out_dir;
    if (sub->count("--seed") > 0) config.seed = seed;
    if (threads >= 0) config.threads = threads;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  }
  return run(config, std::cout, std::cerr);
}
