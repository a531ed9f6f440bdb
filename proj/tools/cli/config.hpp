#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "maser/params.hpp"

namespace maser::cli {

/// Bad configuration or usage; the CLI exits with status 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything a subcommand needs. Keys in the config file match the field
/// names; see docs/formats.md for the meaning of each.
struct RunConfig {
  std::string command;

  // model
  double nex = 150.0;
  double nu = 0.15;
  double alpha = 6.6;
  double s = 0.0;

  // sweeps
  double alpha_min = 0.5;
  double alpha_max = 12.0;
  std::int64_t alpha_steps = 116;
  double s_min = -1.0;
  double s_max = 1.0;
  std::int64_t s_steps = 41;
  std::vector<double> nex_list{50.0, 100.0, 150.0};

  // numerics
  double rel_tol = 1e-12;
  double tail_tol = 1e-14;
  double s_tol = 1e-10;
  double ldp_s_max = 2.0;
  std::int64_t dim = 0;
  std::int64_t k_max = 4;
  std::int64_t spectrum_count = 20;
  double window = 0.05;

  // rate function grid (x_min == x_max picks the attainable range)
  double x_min = 0.0;
  double x_max = 0.0;
  std::int64_t x_steps = 41;

  // potential
  double potential_x_max = 1.2;
  std::int64_t potential_samples = 121;

  // trajectories
  double t_max = 100.0;
  std::int64_t n_traj = 1000;
  std::int64_t paths = 3;
  std::int64_t initial = 0;
  std::uint64_t seed = 1;
  std::int64_t level_cap = 0;
  std::int64_t threshold = 0;
  double min_dwell = 1.0;

  // execution
  std::int64_t threads = 0;
  std::string out = ".";

  [[nodiscard]] MaserParams params() const { return MaserParams::from_alpha(nex, alpha, nu); }
  [[nodiscard]] MaserParams params_at(double a, double n) const {
    return MaserParams::from_alpha(n, a, nu);
  }

  /// Uniform grid helpers; a single step yields the lower end.
  [[nodiscard]] std::vector<double> alpha_grid() const;
  [[nodiscard]] std::vector<double> s_grid() const;

  bool operator==(const RunConfig&) const = default;
};

/// Sets one key from its textual value. Throws ConfigError for unknown keys
/// or malformed values.
void set_value(RunConfig& config, const std::string& key, const std::string& value);

/// Applies "key=value".
void apply_override(RunConfig& config, const std::string& assignment);

/// Flat "key = value" text; '#' starts a comment, blank lines are ignored.
void apply_text(RunConfig& config, const std::string& text);
void apply_file(RunConfig& config, const std::string& path);

/// Canonical text form: every key in a fixed order, reals in shortest
/// round-trip notation. apply_text(to_text(c)) reproduces c exactly.
std::string to_text(const RunConfig& config);

/// Checks the invariants (grids non-empty and ordered, parameters valid).
void validate(const RunConfig& config);

/// FNV-1a 64 of the command and canonical text, excluding `threads` and
/// `out` (they do not change results).
std::uint64_t config_hash(const RunConfig& config);

/// Shortest decimal text that parses back to the same double.
std::string format_real(double x);

/// Thread count: the config value, else MASER_LDP_THREADS, else 1.
unsigned resolve_threads(const RunConfig& config);

}  // namespace maser::cli
