#include "maser/trajectories.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include "maser/model.hpp"

namespace maser {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

TrajectoryRng::TrajectoryRng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

double TrajectoryRng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

namespace {

struct RateCache {
  std::vector<double> counted;
  std::vector<double> up;    // nu (n+1)
  std::vector<double> down;  // (nu+1) n
  std::size_t cap = 0;
};

RateCache make_cache(const MaserParams& params, std::size_t level_cap) {
  RateCache c;
  c.cap = level_cap > 0 ? level_cap
                        : static_cast<std::size_t>(200.0 * std::max(1.0, params.nex));
  const RateTable t = rates(params, c.cap + 1);
  c.counted = t.counted;
  c.up.resize(c.cap + 1);
  for (std::size_t n = 0; n <= c.cap; ++n) c.up[n] = params.nu * (static_cast<double>(n) + 1.0);
  c.down = t.death;
  return c;
}

// Gillespie loop; `on_event` sees every jump in time order.
template <class OnEvent>
std::uint64_t run_path(const RateCache& rc, std::size_t initial, double t_max, std::uint64_t seed,
                       OnEvent&& on_event) {
  TrajectoryRng rng(seed);
  std::size_t n = initial;
  double t = 0.0;
  std::uint64_t count = 0;
  for (;;) {
    const double c = rc.counted[n];
    const double up = rc.up[n];
    const double total = c + up + rc.down[n];
    if (total <= 0.0) break;
    t += -std::log1p(-rng.uniform()) / total;
    if (t > t_max) break;
    const double pick = rng.uniform() * total;
    JumpType type;
    if (pick < c) {
      type = JumpType::ground_atom;
      ++n;
      ++count;
    } else if (pick < c + up) {
      type = JumpType::absorption;
      ++n;
    } else {
      type = JumpType::emission;
      --n;
    }
    if (n >= rc.cap) {
      std::ostringstream msg;
      msg << "trajectory seed " << seed << " reached level cap " << rc.cap << " at t=" << t;
      throw TrajectoryAbort(msg.str());
    }
    on_event(t, type, n);
  }
  return count;
}

}  // namespace

Trajectory simulate(const MaserParams& params, std::size_t initial, double t_max,
                    std::uint64_t seed, const SimulationOptions& options) {
  if (!std::isfinite(t_max) || !(t_max > 0.0))
    throw std::invalid_argument("simulate: t_max must be finite and > 0");
  params.validate();
  const RateCache rc = make_cache(params, options.level_cap);
  if (initial >= rc.cap) throw std::invalid_argument("simulate: initial level above the cap");

  Trajectory traj;
  traj.initial = initial;
  traj.t_final = t_max;
  traj.count_1 = run_path(rc, initial, t_max, seed, [&](double t, JumpType type, std::size_t n) {
    if (options.record_events) traj.events.push_back({t, type, n});
  });
  return traj;
}

EnsembleStats ensemble(const MaserParams& params, std::size_t initial, double t_max,
                       std::size_t n_traj, const std::vector<double>& s_list,
                       std::uint64_t seed_base, const EnsembleOptions& options) {
  if (n_traj < 2) throw std::invalid_argument("ensemble: n_traj must be >= 2");
  if (!std::isfinite(t_max) || !(t_max > 0.0))
    throw std::invalid_argument("ensemble: t_max must be finite and > 0");
  params.validate();
  const RateCache rc = make_cache(params, options.level_cap);
  if (initial >= rc.cap) throw std::invalid_argument("ensemble: initial level above the cap");

  std::vector<std::uint64_t> counts(n_traj, 0);
  std::vector<char> ok(n_traj, 1);
  auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t i = begin; i < n_traj; i += stride) {
      try {
        counts[i] = run_path(rc, initial, t_max, seed_base + i, [](double, JumpType, std::size_t) {});
      } catch (const TrajectoryAbort&) {
        ok[i] = 0;
      }
    }
  };
  const unsigned threads = std::max(1u, options.threads);
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
    for (auto& th : pool) th.join();
  }

  EnsembleStats st;
  st.t_final = t_max;
  st.seed_base = seed_base;
  for (std::size_t i = 0; i < n_traj; ++i) {
    if (ok[i])
      st.counts.push_back(counts[i]);
    else
      ++st.aborted;
  }
  if (static_cast<double>(st.aborted) > 1e-3 * static_cast<double>(n_traj)) {
    std::ostringstream msg;
    msg << "ensemble: " << st.aborted << " of " << n_traj << " trajectories hit the level cap";
    throw std::runtime_error(msg.str());
  }
  st.n_traj = st.counts.size();
  if (st.n_traj < 2) throw std::runtime_error("ensemble: fewer than two completed trajectories");

  const double nt = static_cast<double>(st.n_traj);
  double mean = 0.0;
  for (auto c : st.counts) mean += static_cast<double>(c) / t_max;
  mean /= nt;
  double ss = 0.0;
  for (auto c : st.counts) {
    const double d = static_cast<double>(c) / t_max - mean;
    ss += d * d;
  }
  const double var = ss / (nt - 1.0);
  st.mean_rate = mean;
  st.mean_rate_se = std::sqrt(var / nt);
  st.var_rate = t_max * var;

  for (double s : s_list) {
    // Work with e^{s c - shift} so the squares stay finite; shift is the
    // largest exponent.
    double shift = -INFINITY;
    for (auto c : st.counts) shift = std::max(shift, s * static_cast<double>(c));
    double m = 0.0;
    for (auto c : st.counts) m += std::exp(s * static_cast<double>(c) - shift);
    m /= nt;
    double v = 0.0;
    for (auto c : st.counts) {
      const double d = std::exp(s * static_cast<double>(c) - shift) - m;
      v += d * d;
    }
    v /= (nt - 1.0);
    const double scale = std::exp(shift);
    st.mgf_estimates.push_back({s, m * scale, std::sqrt(v / nt) * scale});
  }
  return st;
}

std::vector<DwellSegment> dwell_times(const Trajectory& traj, std::size_t threshold,
                                      double min_dwell) {
  auto phase_of = [&](std::size_t n) { return n < threshold ? Phase::low : Phase::high; };

  // Raw runs of constant phase.
  std::vector<DwellSegment> runs;
  Phase cur = phase_of(traj.initial);
  double start = 0.0;
  for (const auto& ev : traj.events) {
    const Phase p = phase_of(ev.level);
    if (p == cur) continue;
    runs.push_back({cur, ev.time - start});
    cur = p;
    start = ev.time;
  }
  runs.push_back({cur, traj.t_final - start});

  // Short excursions are absorbed into the committed phase.
  std::vector<DwellSegment> out;
  for (const auto& r : runs) {
    if (out.empty()) {
      out.push_back(r);
    } else if (r.phase == out.back().phase || r.duration < min_dwell) {
      out.back().duration += r.duration;
    } else {
      out.push_back(r);
    }
  }
  return out;
}

std::vector<double> occupation(const Trajectory& traj, std::size_t dim) {
  std::vector<double> occ(dim, 0.0);
  std::size_t n = traj.initial;
  double last = 0.0;
  for (const auto& ev : traj.events) {
    if (n < dim) occ[n] += ev.time - last;
    n = ev.level;
    last = ev.time;
  }
  if (n < dim) occ[n] += traj.t_final - last;
  for (double& x : occ) x /= traj.t_final;
  return occ;
}

}  // namespace maser
