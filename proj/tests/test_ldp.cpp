#include <cmath>

#include "doctest.h"
#include "maser/ldp.hpp"
#include "maser/model.hpp"

using namespace maser;

namespace {

constexpr double kNu = 0.15;

Scgf quadratic(double m, double V) {
  return Scgf{[=](double s) { return m * s + 0.5 * V * s * s; }, [=](double s) { return m + V * s; },
              nullptr};
}

}  // namespace

TEST_SUITE("ldp") {

TEST_CASE("quadratic SCGF has a quadratic conjugate") {
  const double m = 3.0, V = 2.5;
  std::vector<double> xs;
  for (int i = 0; i <= 20; ++i) xs.push_back(m - 4.0 + 0.4 * i);
  const RateFunctionTable t = rate_function(quadratic(m, V), xs);
  CHECK(t.m == doctest::Approx(m).epsilon(1e-14));
  CHECK(t.V == doctest::Approx(V).epsilon(1e-8));
  for (const auto& pt : t.points) {
    REQUIRE(pt.attainable);
    CHECK(std::abs(pt.I - (pt.x - m) * (pt.x - m) / (2.0 * V)) <= 1e-8);
    CHECK(std::abs(pt.s_star - (pt.x - m) / V) <= 1e-9);
  }
}

TEST_CASE("zero at the mean") {
  const RateFunctionTable t = rate_function(quadratic(1.5, 0.7), {1.5});
  CHECK(std::abs(t.points[0].I) <= 1e-8);
  CHECK(std::abs(t.points[0].s_star) <= 1e-9);
}

TEST_CASE("unattainable points are flagged, not fatal") {
  RateFunctionOptions o;
  o.s_max = 1.0;
  const RateFunctionTable t = rate_function(quadratic(0.0, 1.0), {-5.0, 0.5, 5.0}, o);
  CHECK_FALSE(t.points[0].attainable);
  CHECK(std::isnan(t.points[0].I));
  CHECK(t.points[1].attainable);
  CHECK_FALSE(t.points[2].attainable);
  CHECK_THROWS_AS(rate_function(quadratic(0.0, 1.0), {0.0}, RateFunctionOptions{0.0, 1e-10, 1}),
                  std::invalid_argument);
}

TEST_CASE("memoization shares eigensolves") {
  int calls = 0;
  Scgf counted{[&](double s) {
                 ++calls;
                 return s * s;
               },
               [&](double s) {
                 ++calls;
                 return 2.0 * s;
               },
               nullptr};
  MemoizedScgf memo(counted);
  memo(0.25);
  memo(0.25);
  CHECK(memo.size() == 1);
  CHECK(calls == 2);
}

TEST_CASE("maser rate function") {
  const MaserParams p = MaserParams::from_alpha(10.0, 2.0, kNu);
  const Scgf scgf = maser_scgf(p);
  std::vector<double> xs;
  const double lo = scgf.dlambda(-1.0), hi = scgf.dlambda(0.8);
  for (int i = 0; i <= 30; ++i) xs.push_back(lo + (hi - lo) * i / 30.0);
  RateFunctionOptions o;
  o.threads = 3;
  const RateFunctionTable t = rate_function(p, xs, o);
  const auto [m, V] = clt_params(p);
  CHECK(t.m == m);
  CHECK(t.V == V);

  double prev_s = -INFINITY;
  for (std::size_t i = 0; i < t.points.size(); ++i) {
    const auto& pt = t.points[i];
    REQUIRE(pt.attainable);
    CHECK(pt.I >= -1e-12);
    CHECK(pt.s_star >= prev_s);
    prev_s = pt.s_star;
    CHECK(std::abs(pt.s_star * pt.x - pt.I - scgf.lambda(pt.s_star)) <= 1e-8);
    CHECK(std::abs(scgf.dlambda(pt.s_star) - pt.x) <= 1e-8 * std::max(1.0, pt.x));
    if (i > 0 && i + 1 < t.points.size()) {
      const double h = xs[1] - xs[0];
      CHECK((t.points[i + 1].I - 2.0 * pt.I + t.points[i - 1].I) / (h * h) >= -1e-9);
    }
  }

  const RateFunctionTable single = rate_function(p, xs, RateFunctionOptions{});
  for (std::size_t i = 0; i < xs.size(); ++i) CHECK(single.points[i].I == t.points[i].I);
}

TEST_CASE("re-transform recovers lambda") {
  const MaserParams p = MaserParams::from_alpha(10.0, 2.0, kNu);
  const Scgf scgf = maser_scgf(p);
  std::vector<double> xs;
  const double lo = scgf.dlambda(-1.0), hi = scgf.dlambda(0.9);
  for (int i = 0; i <= 800; ++i) xs.push_back(lo + (hi - lo) * i / 800.0);
  const RateFunctionTable t = rate_function(scgf, xs);
  for (double s = -0.7; s <= 0.7; s += 0.1) {
    double best = -INFINITY;
    for (const auto& pt : t.points) best = std::max(best, s * pt.x - pt.I);
    CHECK(std::abs(best - scgf.lambda(s)) <= 1e-4);
  }
}

TEST_CASE("near-flat rate function between the two phases") {
  const MaserParams p = MaserParams::from_alpha(50.0, 6.6, kNu);
  const Crossover c = crossover(p);
  std::vector<double> xs;
  for (int i = 1; i <= 9; ++i) xs.push_back(c.rate_low + (c.rate_high - c.rate_low) * i / 10.0);
  const Scgf scgf = maser_scgf(p);
  xs.push_back(scgf.dlambda(-0.5));
  xs.push_back(scgf.dlambda(0.5));
  const RateFunctionTable t = rate_function(scgf, xs);
  for (std::size_t i = 0; i < 9; ++i) CHECK(t.points[i].I < 1e-3);
  CHECK(t.points[9].I > 0.5);
  CHECK(t.points[10].I > 0.5);
}

TEST_CASE("CLT parameters") {
  const auto [m0, V0] = clt_params(MaserParams{0.0, 0.0, kNu});
  CHECK(m0 == 0.0);
  CHECK(V0 == 0.0);
  const MaserParams p = MaserParams::from_alpha(150.0, 6.6, kNu);
  const auto [m, V] = clt_params(p);
  CHECK(std::abs(m - mean_count_rate(p, stationary(p)).from_counts) <= 1e-8 * m);
  CHECK(V >= 0.0);
}

}  // TEST_SUITE
