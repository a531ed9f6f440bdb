#include "cli/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <variant>

namespace maser::cli {

namespace {

using Field = std::variant<double RunConfig::*, std::int64_t RunConfig::*,
                           std::uint64_t RunConfig::*, std::string RunConfig::*,
                           std::vector<double> RunConfig::*>;

struct Key {
  const char* name;
  Field field;
};

// Order defines the canonical text.
const std::vector<Key>& keys() {
  static const std::vector<Key> table{
      {"nex", &RunConfig::nex},
      {"nu", &RunConfig::nu},
      {"alpha", &RunConfig::alpha},
      {"s", &RunConfig::s},
      {"alpha_min", &RunConfig::alpha_min},
      {"alpha_max", &RunConfig::alpha_max},
      {"alpha_steps", &RunConfig::alpha_steps},
      {"s_min", &RunConfig::s_min},
      {"s_max", &RunConfig::s_max},
      {"s_steps", &RunConfig::s_steps},
      {"nex_list", &RunConfig::nex_list},
      {"rel_tol", &RunConfig::rel_tol},
      {"tail_tol", &RunConfig::tail_tol},
      {"s_tol", &RunConfig::s_tol},
      {"ldp_s_max", &RunConfig::ldp_s_max},
      {"dim", &RunConfig::dim},
      {"k_max", &RunConfig::k_max},
      {"spectrum_count", &RunConfig::spectrum_count},
      {"window", &RunConfig::window},
      {"x_min", &RunConfig::x_min},
      {"x_max", &RunConfig::x_max},
      {"x_steps", &RunConfig::x_steps},
      {"potential_x_max", &RunConfig::potential_x_max},
      {"potential_samples", &RunConfig::potential_samples},
      {"t_max", &RunConfig::t_max},
      {"n_traj", &RunConfig::n_traj},
      {"paths", &RunConfig::paths},
      {"initial", &RunConfig::initial},
      {"seed", &RunConfig::seed},
      {"level_cap", &RunConfig::level_cap},
      {"threshold", &RunConfig::threshold},
      {"min_dwell", &RunConfig::min_dwell},
      {"threads", &RunConfig::threads},
      {"out", &RunConfig::out},
  };
  return table;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || first == last)
    throw ConfigError("invalid value '" + text + "' for key '" + key + "'");
  return value;
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<double>(key, trim(item)));
  if (out.empty()) throw ConfigError("empty list for key '" + key + "'");
  return out;
}

std::string format_field(const RunConfig& c, const Field& f) {
  return std::visit(
      [&](auto member) -> std::string {
        const auto& v = c.*member;
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, double>) {
          return format_real(v);
        } else if constexpr (std::is_same_v<V, std::string>) {
          return v;
        } else if constexpr (std::is_same_v<V, std::vector<double>>) {
          std::string s;
          for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_real(v[i]);
          return s;
        } else {
          return std::to_string(v);
        }
      },
      f);
}

std::vector<double> uniform(double lo, double hi, std::int64_t steps) {
  std::vector<double> g;
  if (steps == 1) return {lo};
  for (std::int64_t i = 0; i < steps; ++i)
    g.push_back(i == steps - 1 ? hi
                               : lo + (hi - lo) * static_cast<double>(i) /
                                          static_cast<double>(steps - 1));
  return g;
}

}  // namespace

std::string format_real(double x) {
  char buf[64];
  if (x == 0.0) x = 0.0;
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, ptr);
}

std::vector<double> RunConfig::alpha_grid() const {
  return uniform(alpha_min, alpha_max, alpha_steps);
}

std::vector<double> RunConfig::s_grid() const { return uniform(s_min, s_max, s_steps); }

void set_value(RunConfig& config, const std::string& key, const std::string& value) {
  for (const auto& k : keys()) {
    if (key != k.name) continue;
    std::visit(
        [&](auto member) {
          auto& v = config.*member;
          using V = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<V, std::string>) {
            v = value;
          } else if constexpr (std::is_same_v<V, std::vector<double>>) {
            v = parse_list(key, value);
          } else {
            v = parse_number<V>(key, value);
          }
        },
        k.field);
    return;
  }
  throw ConfigError("unknown config key '" + key + "'");
}

void apply_override(RunConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + assignment + "'");
  set_value(config, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void apply_text(RunConfig& config, const std::string& text) {
  std::stringstream ss(text);
  std::string line;
  int number = 0;
  while (std::getline(ss, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    try {
      apply_override(config, line);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(number) + ": " + e.what());
    }
  }
}

void apply_file(RunConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  apply_text(config, buf.str());
}

std::string to_text(const RunConfig& config) {
  std::string out;
  for (const auto& k : keys()) out += std::string(k.name) + " = " + format_field(config, k.field) + "\n";
  return out;
}

void validate(const RunConfig& c) {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  auto finite = [](double x) { return std::isfinite(x); };
  require(finite(c.nex) && c.nex >= 0.0, "nex must be finite and >= 0");
  require(finite(c.nu) && c.nu >= 0.0, "nu must be finite and >= 0");
  require(finite(c.alpha) && c.alpha >= 0.0, "alpha must be finite and >= 0");
  require(finite(c.s), "s must be finite");
  require(c.alpha_steps >= 1 && c.s_steps >= 1 && c.x_steps >= 1 && c.potential_samples >= 1,
          "grid steps must be >= 1");
  require(finite(c.alpha_min) && finite(c.alpha_max) && c.alpha_min >= 0.0 &&
              c.alpha_min <= c.alpha_max,
          "need 0 <= alpha_min <= alpha_max");
  require(finite(c.s_min) && finite(c.s_max) && c.s_min <= c.s_max, "need s_min <= s_max");
  require(finite(c.x_min) && finite(c.x_max) && c.x_min <= c.x_max, "need x_min <= x_max");
  require(!c.nex_list.empty(), "nex_list must not be empty");
  for (double n : c.nex_list) require(finite(n) && n >= 0.0, "nex_list entries must be >= 0");
  require(c.rel_tol >= 1e-14 && c.rel_tol <= 1e-6, "rel_tol must lie in [1e-14, 1e-6]");
  require(c.tail_tol > 0.0 && c.tail_tol <= 1e-6, "tail_tol must lie in (0, 1e-6]");
  require(c.s_tol > 0.0, "s_tol must be > 0");
  require(c.ldp_s_max > 0.0 && finite(c.ldp_s_max), "ldp_s_max must be > 0");
  require(c.dim >= 0 && c.dim != 1, "dim must be 0 (automatic) or >= 2");
  require(c.k_max >= 1 && c.k_max <= 6, "k_max must lie in [1, 6]");
  require(c.spectrum_count >= 1, "spectrum_count must be >= 1");
  require(c.window > 0.0 && finite(c.window), "window must be > 0");
  require(c.potential_x_max > 0.0 && finite(c.potential_x_max), "potential_x_max must be > 0");
  require(c.t_max > 0.0 && finite(c.t_max), "t_max must be finite and > 0");
  require(c.n_traj >= 2, "n_traj must be >= 2");
  require(c.paths >= 0, "paths must be >= 0");
  require(c.initial >= 0 && c.level_cap >= 0 && c.threshold >= 0, "levels must be >= 0");
  require(c.min_dwell >= 0.0, "min_dwell must be >= 0");
  require(c.threads >= 0, "threads must be >= 0");
}

std::uint64_t config_hash(const RunConfig& config) {
  RunConfig c = config;
  c.threads = 0;
  c.out = ".";
  const std::string text = "command = " + c.command + "\n" + to_text(c);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

unsigned resolve_threads(const RunConfig& config) {
  if (config.threads > 0) return static_cast<unsigned>(config.threads);
  if (const char* env = std::getenv("MASER_LDP_THREADS")) {
    const std::string text = env;
    unsigned v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec == std::errc{} && ptr == text.data() + text.size() && v > 0) return v;
  }
  return 1;
}

}  // namespace maser::cli
