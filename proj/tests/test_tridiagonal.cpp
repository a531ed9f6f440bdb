#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "maser/tridiagonal.hpp"

using namespace maser;

TEST_SUITE("tridiagonal") {

TEST_CASE("second-difference matrix") {
  const std::size_t n = 30;
  const std::vector<double> diag(n, 2.0), off(n - 1, -1.0);
  const auto ev = tridiag::eigenvalues(diag, off);
  for (std::size_t k = 0; k < n; ++k) {
    const double exact = 2.0 - 2.0 * std::cos(std::numbers::pi * static_cast<double>(n - k) / (n + 1.0));
    CHECK(ev[k] == doctest::Approx(exact).epsilon(1e-13));
    const auto br = tridiag::kth_largest(diag, off, k);
    CHECK(br.lo <= br.hi);
    CHECK(br.hi == doctest::Approx(exact).epsilon(1e-13));
  }
}

TEST_CASE("QL, bisection and Sturm counts agree on random matrices") {
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial) * 7;
    std::vector<double> diag(n), off(n - 1);
    for (auto& d : diag) d = u(rng);
    for (auto& o : off) o = u(rng);
    const auto ev = tridiag::eigenvalues(diag, off);
    REQUIRE(ev.size() == n);
    CHECK(std::is_sorted(ev.begin(), ev.end(), std::greater<>()));
    const auto g = tridiag::gershgorin(diag, off);
    CHECK(g.lo <= ev.back());
    CHECK(g.hi >= ev.front());
    for (std::size_t k = 0; k < n; ++k) {
      CHECK(tridiag::kth_largest(diag, off, k).hi == doctest::Approx(ev[k]).epsilon(1e-10));
      CHECK(tridiag::count_below(diag, off, ev[k] + 1e-8) >= n - k);
    }
    double trace = 0.0, sum = 0.0;
    for (double d : diag) trace += d;
    for (double e : ev) sum += e;
    CHECK(sum == doctest::Approx(trace).epsilon(1e-10));
  }
}

TEST_CASE("one by one") {
  const std::vector<double> diag{-4.5};
  const std::vector<double> off;
  CHECK(tridiag::eigenvalues(diag, off) == std::vector<double>{-4.5});
  CHECK(tridiag::count_below(diag, off, -4.0) == 1);
  CHECK(tridiag::count_below(diag, off, -5.0) == 0);
}

}  // TEST_SUITE
