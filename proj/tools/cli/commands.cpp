#include "cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <exception>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include "cli/csv.hpp"
#include "maser/ldp.hpp"
#include "maser/model.hpp"
#include "maser/spectral.hpp"
#include "maser/trajectories.hpp"
#include "maser/validation.hpp"

namespace maser::cli {

namespace {

struct Output {
  std::string name;
  CsvTable table;
};

struct Session {
  const RunConfig& cfg;
  unsigned threads = 1;
  std::deque<Output> outputs;
  bool complete = true;
  std::vector<std::string> problems;
  std::ostream& log;
  std::ostream& err;

  CsvTable& table(const std::string& name, std::vector<std::string> header) {
    outputs.push_back({name, CsvTable(std::move(header))});
    return outputs.back().table;
  }
  void fail(const std::string& what) {
    complete = false;
    problems.push_back(what);
  }
};

template <class T>
struct Outcome {
  std::optional<T> value;
  std::string error;
};

// Evaluates f(i) for i < n on a static strided partition; results stay in
// index order.
template <class T, class F>
std::vector<Outcome<T>> parallel_map(std::size_t n, unsigned threads, F f) {
  std::vector<Outcome<T>> out(n);
  auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t i = begin; i < n; i += stride) {
      try {
        out[i].value = f(i);
      } catch (const std::exception& e) {
        out[i].error = e.what();
      }
    }
  };
  const unsigned t = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (t <= 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < t; ++k) pool.emplace_back(work, k, t);
    for (auto& th : pool) th.join();
  }
  return out;
}

std::string point(std::initializer_list<std::pair<const char*, double>> coords) {
  std::string s;
  for (const auto& [k, v] : coords) s += (s.empty() ? "" : " ") + std::string(k) + "=" + format_real(v);
  return s;
}

SpectralOptions spectral_options(const RunConfig& c) {
  SpectralOptions o;
  o.rel_tol = c.rel_tol;
  return o;
}

void cmd_stationary(Session& ses) {
  const RunConfig& c = ses.cfg;
  auto& summary = ses.table("stationary_summary.csv", {"alpha", "mean", "variance", "count_rate",
                                                        "n_maxima", "dim", "tail_mass"});
  auto& dist = ses.table("stationary_distribution.csv", {"alpha", "n", "prob"});
  const auto alphas = c.alpha_grid();
  StationaryOptions so;
  so.tail_tol = c.tail_tol;
  const auto res = parallel_map<StationaryDistribution>(alphas.size(), ses.threads, [&](std::size_t i) {
    return stationary(c.params_at(alphas[i], c.nex), so);
  });
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (!res[i].value) {
      ses.fail("stationary failed at " + point({{"alpha", alphas[i]}}) + ": " + res[i].error);
      break;
    }
    const auto& ss = *res[i].value;
    const MeanCountRate mc = mean_count_rate(c.params_at(alphas[i], c.nex), ss, 1.0);
    summary.row()
        .add(alphas[i])
        .add(ss.mean)
        .add(ss.variance)
        .add(mc.from_counts)
        .add(local_maxima(ss.probs).size())
        .add(ss.dim)
        .add(ss.tail_mass);
    for (std::size_t n = 0; n < ss.dim; ++n) dist.row().add(alphas[i]).add(n).add(ss.probs[n]);
  }
}

void cmd_potential(Session& ses) {
  const RunConfig& c = ses.cfg;
  auto& levels = ses.table("potential_levels.csv", {"nex", "n", "x", "U", "U_over_nex"});
  auto& limit = ses.table("potential_limit.csv", {"x", "v"});
  auto& extrema = ses.table("potential_extrema.csv", {"theta", "x", "kind"});
  for (double nex : c.nex_list) {
    if (!(nex > 0.0)) throw ConfigError("potential needs nex_list entries > 0");
    const auto dim = static_cast<std::size_t>(std::ceil(c.potential_x_max * nex)) + 2;
    const StationaryDistribution ss = stationary_truncated(c.params_at(c.alpha, nex), dim);
    for (std::size_t n = 0; n < dim; ++n) {
      const double u = 0.0 - ss.log_weights[n];
      levels.row().add(nex).add(n).add(static_cast<double>(n) / nex).add(u).add(u / nex);
    }
  }
  std::vector<double> xs;
  const auto k = c.potential_samples;
  for (std::int64_t i = 0; i < k; ++i)
    xs.push_back(k == 1 ? 0.0 : c.potential_x_max * static_cast<double>(i) / static_cast<double>(k - 1));
  const auto v = limit_potential(c.alpha, c.nu, xs);
  for (std::size_t i = 0; i < xs.size(); ++i) limit.row().add(xs[i]).add(v[i]);
  if (c.alpha > 0.0) {
    for (const auto& root : rate_intersections(c.alpha, c.nu))
      extrema.row()
          .add(root.theta)
          .add(root.theta * root.theta / (c.alpha * c.alpha))
          .add(to_string(root.kind));
  }
}

void cmd_trajectory(Session& ses) {
  const RunConfig& c = ses.cfg;
  const MaserParams p = c.params();
  const auto initial = static_cast<std::size_t>(c.initial);
  auto& events = ses.table("trajectory_events.csv",
                           {"path", "seed", "time", "type", "level", "count"});
  auto& dwell = ses.table("trajectory_dwell.csv", {"path", "segment", "phase", "duration"});
  auto& summary = ses.table("trajectory_summary.csv",
                            {"n_traj", "t_final", "mean_rate", "mean_rate_se", "var_rate", "aborted",
                             "m", "V", "seed_base"});
  auto& mgf = ses.table("trajectory_mgf.csv",
                        {"s", "estimate", "standard_error", "relative_se", "exact", "z"});

  std::size_t threshold = static_cast<std::size_t>(c.threshold);
  if (threshold == 0 && c.alpha > 0.0) {
    for (const auto& root : rate_intersections(c.alpha, c.nu))
      if (root.kind == ExtremumKind::min) {
        threshold = static_cast<std::size_t>(std::lround(intersection_level(root.theta, c.nex, c.alpha)));
        break;
      }
  }

  SimulationOptions so;
  so.level_cap = static_cast<std::size_t>(c.level_cap);
  for (std::int64_t k = 0; k < c.paths; ++k) {
    const std::uint64_t seed = c.seed + static_cast<std::uint64_t>(k);
    const Trajectory tr = simulate(p, initial, c.t_max, seed, so);
    std::int64_t count = 0;
    events.row().add(k).add(std::to_string(seed)).add(0.0).add(std::string("0"))
        .add(initial).add(count);
    for (const auto& ev : tr.events) {
      if (ev.type == JumpType::ground_atom) ++count;
      events.row().add(k).add(std::to_string(seed)).add(ev.time)
          .add(static_cast<std::int64_t>(ev.type)).add(ev.level).add(count);
    }
    if (threshold > 0) {
      const auto segs = dwell_times(tr, threshold, c.min_dwell);
      for (std::size_t i = 0; i < segs.size(); ++i)
        dwell.row().add(k).add(i)
            .add(std::string(segs[i].phase == Phase::low ? "low" : "high"))
            .add(segs[i].duration);
    }
  }

  const auto s_list = c.s_grid();
  EnsembleOptions eo;
  eo.threads = ses.threads;
  eo.level_cap = static_cast<std::size_t>(c.level_cap);
  const EnsembleStats st = ensemble(p, initial, c.t_max, static_cast<std::size_t>(c.n_traj), s_list,
                                    c.seed, eo);
  double m = 0.0, V = 0.0;
  if (p.nu > 0.0) std::tie(m, V) = clt_params(p, spectral_options(c));
  summary.row().add(st.n_traj).add(st.t_final).add(st.mean_rate).add(st.mean_rate_se)
      .add(st.var_rate).add(st.aborted).add(m).add(V).add(std::to_string(st.seed_base));

  std::size_t dim = static_cast<std::size_t>(c.dim);
  for (const auto& est : st.mgf_estimates) {
    if (c.dim == 0) {
      StationaryOptions sto;
      sto.tail_tol = c.tail_tol;
      const std::size_t base = p.nu > 0.0 ? stationary(p, sto).dim : 2 * initial + 32;
      dim = std::max(base, initial + 1) +
            static_cast<std::size_t>(std::ceil(8.0 * std::exp(std::abs(est.s)) * std::sqrt(p.nex)));
    }
    const double rel = est.estimate != 0.0 ? est.standard_error / std::abs(est.estimate) : 0.0;
    if (rel > 0.1)
      ses.err << "warning: relative standard error " << format_real(rel) << " at s="
              << format_real(est.s) << " exceeds 10%\n";
    const MgfResult exact = mgf_exact(p, est.s, c.t_max, initial, dim);
    const double z = est.standard_error > 0.0 ? (est.estimate - exact.value) / est.standard_error : 0.0;
    mgf.row().add(est.s).add(est.estimate).add(est.standard_error).add(rel).add(exact.value).add(z);
  }
}

struct GridPoint {
  double nex;
  double alpha;
  double s;
};

void spectral_rows(Session& ses, CsvTable& table, const std::vector<GridPoint>& pts, bool with_nex) {
  const RunConfig& c = ses.cfg;
  const auto res = parallel_map<SpectralResult>(pts.size(), ses.threads, [&](std::size_t i) {
    return spectral_bound(c.params_at(pts[i].alpha, pts[i].nex), pts[i].s, spectral_options(c));
  });
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto where = point({{"nex", pts[i].nex}, {"alpha", pts[i].alpha}, {"s", pts[i].s}});
    if (!res[i].value) {
      ses.fail("eigensolve failed at " + where + ": " + res[i].error);
      break;
    }
    const auto& r = *res[i].value;
    table.row();
    if (with_nex) table.add(pts[i].nex);
    table.add(pts[i].alpha).add(pts[i].s).add(r.lambda).add(r.dlambda).add(r.gap).add(r.dim_used)
        .add(r.converged);
    if (!r.converged) ses.fail("truncation did not converge at " + where);
  }
}

void cmd_grid(Session& ses) {
  const RunConfig& c = ses.cfg;
  auto& grid = ses.table("grid.csv",
                         {"alpha", "s", "lambda", "dlambda_ds", "gap", "dim_used", "converged"});
  std::vector<GridPoint> pts;
  for (double a : c.alpha_grid())
    for (double s : c.s_grid()) pts.push_back({c.nex, a, s});
  spectral_rows(ses, grid, pts, false);
}

void cmd_zoom(Session& ses) {
  const RunConfig& c = ses.cfg;
  auto& zoom = ses.table("zoom.csv", {"nex", "alpha", "s", "lambda", "dlambda_ds", "gap",
                                      "dim_used", "converged"});
  auto& cross = ses.table("zoom_crossover.csv", {"nex", "alpha", "window", "rate_low", "rate_high",
                                                 "s_mid", "width", "max_curvature", "s_at_max"});
  std::vector<GridPoint> pts;
  for (double n : c.nex_list)
    for (double s : c.s_grid()) pts.push_back({n, c.alpha, s});
  spectral_rows(ses, zoom, pts, true);
  const auto res = parallel_map<Crossover>(c.nex_list.size(), ses.threads, [&](std::size_t i) {
    return crossover(c.params_at(c.alpha, c.nex_list[i]), c.window, spectral_options(c));
  });
  for (std::size_t i = 0; i < res.size(); ++i) {
    if (!res[i].value) {
      ses.fail("cross-over search failed at " + point({{"nex", c.nex_list[i]}}) + ": " + res[i].error);
      break;
    }
    const auto& x = *res[i].value;
    cross.row().add(c.nex_list[i]).add(c.alpha).add(c.window).add(x.rate_low).add(x.rate_high)
        .add(x.s_mid).add(x.width).add(x.max_curvature).add(x.s_at_max);
  }
}

void cmd_spectrum(Session& ses) {
  const RunConfig& c = ses.cfg;
  auto& spec = ses.table("spectrum.csv", {"alpha", "s", "index", "eigenvalue", "dim"});
  const auto alphas = c.alpha_grid();
  using Row = std::pair<std::size_t, std::vector<double>>;
  const auto res = parallel_map<Row>(alphas.size(), ses.threads, [&](std::size_t i) {
    const MaserParams p = c.params_at(alphas[i], c.nex);
    std::size_t dim = static_cast<std::size_t>(c.dim);
    if (dim == 0) dim = spectral_bound(p, c.s, spectral_options(c)).dim_used;
    return Row{dim, full_spectrum(p, c.s, dim)};
  });
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (!res[i].value) {
      ses.fail("spectrum failed at " + point({{"alpha", alphas[i]}}) + ": " + res[i].error);
      break;
    }
    const auto& [dim, ev] = *res[i].value;
    const auto count = std::min<std::size_t>(ev.size(), static_cast<std::size_t>(c.spectrum_count));
    for (std::size_t k = 0; k < count; ++k)
      spec.row().add(alphas[i]).add(c.s).add(k).add(ev[k]).add(dim);
  }
}

void cmd_cumulants(Session& ses) {
  const RunConfig& c = ses.cfg;
  auto& table = ses.table("cumulants.csv", {"nex", "alpha", "order", "cumulant", "per_nex",
                                            "digits_lost", "ill_conditioned", "fd_step"});
  std::vector<std::pair<double, double>> pts;
  for (double n : c.nex_list)
    for (double a : c.alpha_grid()) pts.emplace_back(n, a);
  const int k_max = static_cast<int>(c.k_max);
  const auto res = parallel_map<CumulantEstimates>(pts.size(), ses.threads, [&](std::size_t i) {
    return cumulants(c.params_at(pts[i].second, pts[i].first), k_max, spectral_options(c));
  });
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto [nex, alpha] = pts[i];
    if (!res[i].value) {
      ses.fail("cumulants failed at " + point({{"nex", nex}, {"alpha", alpha}}) + ": " + res[i].error);
      break;
    }
    const auto& ce = *res[i].value;
    for (int k = 1; k <= k_max; ++k) {
      double value = ce.m;
      double lost = 0.0;
      bool ill = false;
      if (k >= 2) {
        value = k == 2 ? ce.V : ce.higher[static_cast<std::size_t>(k - 3)];
        lost = ce.digits_lost[static_cast<std::size_t>(k - 2)];
        ill = ce.ill_conditioned[static_cast<std::size_t>(k - 2)];
      }
      table.row().add(nex).add(alpha).add(static_cast<std::int64_t>(k)).add(value)
          .add(nex > 0.0 ? value / nex : 0.0).add(lost).add(ill).add(ce.fd_step);
    }
  }
}

void cmd_ldp(Session& ses) {
  const RunConfig& c = ses.cfg;
  auto& table = ses.table("ldp.csv", {"x", "rate", "s_star", "attainable"});
  auto& clt = ses.table("ldp_clt.csv", {"m", "V"});
  const MaserParams p = c.params();
  const SpectralOptions so = spectral_options(c);
  double lo = c.x_min, hi = c.x_max;
  if (lo == hi) {
    lo = lambda_derivative(p, -0.95 * c.ldp_s_max, so);
    hi = lambda_derivative(p, 0.95 * c.ldp_s_max, so);
  }
  std::vector<double> xs;
  for (std::int64_t i = 0; i < c.x_steps; ++i)
    xs.push_back(c.x_steps == 1 ? lo
                                : lo + (hi - lo) * static_cast<double>(i) /
                                           static_cast<double>(c.x_steps - 1));
  RateFunctionOptions ro;
  ro.s_max = c.ldp_s_max;
  ro.s_tol = c.s_tol;
  ro.threads = ses.threads;
  const RateFunctionTable rf = rate_function(p, xs, ro, so);
  for (const auto& pt : rf.points)
    table.row().add(pt.x).add(pt.I).add(pt.s_star).add(pt.attainable);
  clt.row().add(rf.m).add(rf.V);
}

void cmd_validate(Session& ses) {
  auto& table = ses.table("validation.csv", {"id", "name", "passed", "detail"});
  ValidationOptions vo;
  vo.threads = ses.threads;
  for (int id = 1; id <= kCriterionCount; ++id) {
    const CriterionResult r = run_criterion(id, vo);
    ses.log << format_result(r) << std::endl;
    table.row().add(static_cast<std::int64_t>(r.id)).add(r.name).add(r.passed).add(r.detail);
    if (!r.passed) ses.fail("acceptance criterion " + std::to_string(id) + " failed");
  }
}

using Command = void (*)(Session&);

const std::map<std::string, std::pair<Command, const char*>>& registry() {
  static const std::map<std::string, std::pair<Command, const char*>> table{
      {"stationary", {cmd_stationary, "stationary law, mean and variance over the alpha sweep"}},
      {"potential", {cmd_potential, "effective potential U(n)/nex per nex and its limit v(x)"}},
      {"trajectory", {cmd_trajectory, "jump trajectories, dwell phases and ensemble MGF estimates"}},
      {"grid", {cmd_grid, "lambda, d lambda/ds and gap over the (alpha, s) grid"}},
      {"zoom", {cmd_zoom, "fine s-window per nex at fixed alpha, with cross-over summary"}},
      {"spectrum", {cmd_spectrum, "leading eigenvalues of the tilted generator over alpha"}},
      {"cumulants", {cmd_cumulants, "limiting cumulants over alpha for each nex"}},
      {"ldp", {cmd_ldp, "rate function table by Legendre transform"}},
      {"validate", {cmd_validate, "acceptance battery, one PASS/FAIL line per criterion"}},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"stationary", "potential", "trajectory",
                                              "grid",       "zoom",      "spectrum",
                                              "cumulants",  "ldp",       "validate"};
  return names;
}

std::string command_help(const std::string& name) {
  const auto it = registry().find(name);
  return it == registry().end() ? std::string{} : it->second.second;
}

int run(const RunConfig& config, std::ostream& log, std::ostream& err) {
  const auto it = registry().find(config.command);
  if (it == registry().end()) {
    err << "error: unknown subcommand '" << config.command << "'\n";
    return kUsageError;
  }
  try {
    validate(config);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }

  Session ses{config, resolve_threads(config), {}, true, {}, log, err};
  try {
    it->second.first(ses);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    ses.fail(e.what());
  }

  const std::uint64_t hash = config_hash(config);
  for (const auto& out : ses.outputs) {
    try {
      log << "wrote " << write_csv(config.out, out.name, out.table, ses.complete, hash) << " ("
          << out.table.size() << " rows)\n";
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n";
      return kUsageError;
    }
  }
  for (const auto& p : ses.problems) err << "error: " << p << "\n";
  return ses.complete ? kSuccess : kNumericalError;
}

}  // namespace maser::cli
