#include <cmath>
#include <numeric>

#include "doctest.h"
#include "maser/ldp.hpp"
#include "maser/model.hpp"
#include "maser/spectral.hpp"
#include "maser/trajectories.hpp"

using namespace maser;

namespace {

constexpr double kNu = 0.15;

Trajectory path_of(std::size_t initial, double t_final,
                   std::initializer_list<std::pair<double, std::size_t>> jumps) {
  Trajectory t;
  t.initial = initial;
  t.t_final = t_final;
  for (const auto& [time, level] : jumps) t.events.push_back({time, JumpType::emission, level});
  return t;
}

}  // namespace

TEST_SUITE("trajectories") {

TEST_CASE("degenerate parameters") {
  const Trajectory idle = simulate(MaserParams{0.0, 0.0, 0.0}, 0, 50.0, 3);
  CHECK(idle.events.empty());
  CHECK(idle.count_1 == 0);
  CHECK(idle.t_final == 50.0);

  const Trajectory thermal = simulate(MaserParams{20.0, 0.0, kNu}, 0, 200.0, 4);
  CHECK(thermal.count_1 == 0);
  for (const auto& e : thermal.events) CHECK(e.type != JumpType::ground_atom);
}

TEST_CASE("path invariants") {
  const MaserParams p = MaserParams::from_alpha(30.0, 3.0, kNu);
  const Trajectory t = simulate(p, 2, 100.0, 11);
  std::size_t level = t.initial;
  std::uint64_t counted = 0;
  double prev = 0.0;
  for (const auto& e : t.events) {
    CHECK(e.time > prev);
    CHECK(e.time <= t.t_final);
    prev = e.time;
    if (e.type == JumpType::emission) {
      REQUIRE(level > 0);
      CHECK(e.level == level - 1);
    } else {
      CHECK(e.level == level + 1);
    }
    if (e.type == JumpType::ground_atom) ++counted;
    level = e.level;
  }
  CHECK(counted == t.count_1);
}

TEST_CASE("reproducible streams") {
  const MaserParams p = MaserParams::from_alpha(30.0, 3.0, kNu);
  const Trajectory a = simulate(p, 0, 50.0, 77);
  const Trajectory b = simulate(p, 0, 50.0, 77);
  const Trajectory c = simulate(p, 0, 50.0, 78);
  REQUIRE(a.events.size() == b.events.size());
  for (std::size_t i = 0; i < a.events.size(); ++i) {
    CHECK(a.events[i].time == b.events[i].time);
    CHECK(a.events[i].level == b.events[i].level);
  }
  CHECK((a.events.size() != c.events.size() || a.count_1 != c.count_1 ||
         a.events.front().time != c.events.front().time));
  CHECK(splitmix64(1) != splitmix64(2));
  TrajectoryRng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("ensemble is independent of the thread count") {
  const MaserParams p = MaserParams::from_alpha(10.0, 2.0, kNu);
  const std::vector<double> s_list{-0.1, 0.1};
  const EnsembleStats one = ensemble(p, 0, 20.0, 200, s_list, 100, EnsembleOptions{1, 0});
  const EnsembleStats four = ensemble(p, 0, 20.0, 200, s_list, 100, EnsembleOptions{4, 0});
  CHECK(one.counts == four.counts);
  CHECK(one.mean_rate == four.mean_rate);
  CHECK(one.var_rate == four.var_rate);
  for (std::size_t i = 0; i < s_list.size(); ++i)
    CHECK(one.mgf_estimates[i].estimate == four.mgf_estimates[i].estimate);
}

TEST_CASE("long-time rate statistics match the spectral cumulants") {
  const MaserParams p = MaserParams::from_alpha(10.0, 2.0, kNu);
  const auto [m, V] = clt_params(p);
  const EnsembleStats e = ensemble(p, 0, 200.0, 10000, {}, 2024, EnsembleOptions{2, 0});
  CHECK(e.n_traj == 10000);
  CHECK(e.aborted == 0);
  CHECK(std::abs(e.mean_rate - m) <= 3.0 * e.mean_rate_se + 0.01);
  const double var_se = V * std::sqrt(2.0 / (e.n_traj - 1.0));
  CHECK(std::abs(e.var_rate - V) <= 5.0 * var_se + 0.1);
}

TEST_CASE("finite-time MGF against the exact propagator") {
  const MaserParams p = MaserParams::from_alpha(10.0, 2.0, kNu);
  const double t = 5.0;
  const std::vector<double> s_list{-0.2, 0.2};
  const EnsembleStats e = ensemble(p, 0, t, 20000, s_list, 31337, EnsembleOptions{2, 0});
  for (const auto& est : e.mgf_estimates) {
    const double exact = mgf_exact(p, est.s, t, 0, 120).value;
    CHECK(std::abs(est.estimate - exact) <= 4.0 * est.standard_error);
  }
}

TEST_CASE("MGF estimates stay finite for large exponents") {
  const MaserParams p = MaserParams::from_alpha(10.0, 2.0, kNu);
  const EnsembleStats e = ensemble(p, 0, 1500.0, 20, {0.05}, 5);
  const auto& est = e.mgf_estimates.front();
  CHECK(std::isfinite(est.estimate));
  CHECK(std::isfinite(est.standard_error));
  CHECK(est.standard_error > 0.0);
}

TEST_CASE("argument checks and the level cap") {
  const MaserParams p = MaserParams::from_alpha(10.0, 2.0, kNu);
  CHECK_THROWS_AS(simulate(p, 0, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(simulate(p, 0, -1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(simulate(p, 0, INFINITY, 1), std::invalid_argument);
  CHECK_THROWS_AS(ensemble(p, 0, 1.0, 1, {}, 1), std::invalid_argument);
  SimulationOptions capped;
  capped.level_cap = 3;
  CHECK_THROWS_AS(simulate(p, 0, 1000.0, 1, capped), TrajectoryAbort);
}

TEST_CASE("dwell segmentation") {
  SUBCASE("constant path") {
    const auto d = dwell_times(path_of(10, 7.0, {}), 5);
    REQUIRE(d.size() == 1);
    CHECK(d[0].phase == Phase::high);
    CHECK(d[0].duration == 7.0);
  }
  SUBCASE("single crossing") {
    const auto d = dwell_times(path_of(2, 10.0, {{5.0, 8}}), 5);
    REQUIRE(d.size() == 2);
    CHECK(d[0].phase == Phase::low);
    CHECK(d[0].duration == doctest::Approx(5.0));
    CHECK(d[1].phase == Phase::high);
    CHECK(d[1].duration == doctest::Approx(5.0));
  }
  SUBCASE("short excursion is absorbed") {
    const auto d = dwell_times(path_of(2, 10.0, {{4.0, 8}, {4.3, 2}}), 5, 1.0);
    REQUIRE(d.size() == 1);
    CHECK(d[0].phase == Phase::low);
    CHECK(d[0].duration == doctest::Approx(10.0));
  }
}

TEST_CASE("bistable dwell times exceed the relaxation time") {
  const MaserParams p = MaserParams::from_alpha(50.0, 6.6, kNu);
  const Trajectory t = simulate(p, 0, 20000.0, 7);
  const auto d = dwell_times(t, 30, 1.0);
  double low = 0.0, high = 0.0;
  std::size_t n_low = 0, n_high = 0;
  for (std::size_t i = 1; i + 1 < d.size(); ++i) {
    if (d[i].phase == Phase::low) {
      low += d[i].duration;
      ++n_low;
    } else {
      high += d[i].duration;
      ++n_high;
    }
  }
  REQUIRE(n_low > 3);
  REQUIRE(n_high > 3);
  const double relax = 1.0 / spectral_gap(MaserParams::from_alpha(50.0, 3.0, kNu), 0.0);
  CHECK(low / n_low > 20.0 * relax);
  CHECK(high / n_high > 20.0 * relax);
}

TEST_CASE("occupation approaches the stationary law") {
  const MaserParams p = MaserParams::from_alpha(10.0, 2.0, kNu);
  const StationaryDistribution ss = stationary(p);
  const Trajectory t = simulate(p, 0, 10000.0, 99);
  const auto occ = occupation(t, ss.dim);
  CHECK(std::accumulate(occ.begin(), occ.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));
  double tv = 0.0;
  for (std::size_t n = 0; n < ss.dim; ++n) tv += std::abs(occ[n] - ss.probs[n]);
  CHECK(0.5 * tv < 0.02);
}

}  // TEST_SUITE
