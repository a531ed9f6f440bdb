#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "maser/generator.hpp"
#include "maser/model.hpp"
#include "maser/tridiagonal.hpp"

using namespace maser;

namespace {

constexpr double kNu = 0.15;

using Matrix = std::vector<std::vector<double>>;

Matrix dense(const TiltedGenerator& g) {
  Matrix m(g.dim, std::vector<double>(g.dim, 0.0));
  for (std::size_t n = 0; n < g.dim; ++n) m[n][n] = g.diag[n];
  for (std::size_t n = 0; n + 1 < g.dim; ++n) {
    m[n + 1][n] = g.sub[n];
    m[n][n + 1] = g.sup[n];
  }
  return m;
}

Matrix dense_sym(const std::vector<double>& diag, const std::vector<double>& off) {
  Matrix m(diag.size(), std::vector<double>(diag.size(), 0.0));
  for (std::size_t n = 0; n < diag.size(); ++n) m[n][n] = diag[n];
  for (std::size_t n = 0; n < off.size(); ++n) m[n][n + 1] = m[n + 1][n] = off[n];
  return m;
}

// Characteristic polynomial coefficients by Faddeev-LeVerrier.
std::vector<double> char_poly(const Matrix& a) {
  const std::size_t n = a.size();
  std::vector<double> c(n + 1, 0.0);
  c[n] = 1.0;
  Matrix m(n, std::vector<double>(n, 0.0));
  for (std::size_t k = 1; k <= n; ++k) {
    Matrix am(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t l = 0; l < n; ++l) acc += a[i][l] * m[l][j];
        am[i][j] = acc;
      }
    for (std::size_t i = 0; i < n; ++i) am[i][i] += c[n - k + 1];
    m = am;
    Matrix prod(n, std::vector<double>(n, 0.0));
    double trace = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t l = 0; l < n; ++l) acc += a[i][l] * m[l][i];
      trace += acc;
    }
    c[n - k] = -trace / static_cast<double>(k);
  }
  return c;
}

}  // namespace

TEST_SUITE("generator") {

TEST_CASE("bands match direct evaluation") {
  const TiltedGenerator g = build_tilted(MaserParams::from_alpha(150.0, 6.6, kNu), 0.1, 60);
  CHECK(g.sub[0] == doctest::Approx(43.807915750220425).epsilon(1e-13));
  CHECK(g.sup[0] == doctest::Approx(1.15).epsilon(1e-15));
  CHECK(g.diag[0] == doctest::Approx(-39.653315764260903).epsilon(1e-13));
  CHECK(g.sub[5] == doctest::Approx(156.46534132408861).epsilon(1e-13));
  CHECK(g.sup[5] == doctest::Approx(6.9).epsilon(1e-15));
  CHECK(g.diag[5] == doctest::Approx(-147.41134177957110).epsilon(1e-13));
  CHECK(g.sub[40] == doctest::Approx(21.478382649645344).epsilon(1e-13));
  CHECK(g.sup[40] == doctest::Approx(47.15).epsilon(1e-15));
  CHECK(g.diag[40] == doctest::Approx(-66.019694179372294).epsilon(1e-13));
  for (std::size_t n = 0; n + 1 < g.dim; ++n) {
    CHECK(g.sub[n] > 0.0);
    CHECK(g.sup[n] > 0.0);
    CHECK(g.sym_off[n] * g.sym_off[n] == doctest::Approx(g.sub[n] * g.sup[n]).epsilon(1e-15));
  }
}

TEST_CASE("conservation at s = 0") {
  const TiltedGenerator g = build_tilted(MaserParams::from_alpha(50.0, 3.0, kNu), 0.0, 120);
  const std::vector<double> ones(g.dim, 1.0);
  const auto col = maser::apply_transpose(g, ones);
  for (std::size_t n = 0; n + 1 < g.dim; ++n) CHECK(std::abs(col[n]) <= 1e-12 * std::abs(g.diag[n]));
  CHECK(col.back() < 0.0);
}

TEST_CASE("apply and apply_transpose agree with the dense matrix") {
  const TiltedGenerator g = build_tilted(MaserParams::from_alpha(10.0, 2.0, kNu), 0.4, 9);
  const Matrix m = dense(g);
  std::vector<double> x(g.dim);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::cos(1.0 + static_cast<double>(i));
  const auto y = maser::apply(g, x);
  const auto yt = maser::apply_transpose(g, x);
  for (std::size_t i = 0; i < g.dim; ++i) {
    double a = 0.0, at = 0.0;
    for (std::size_t j = 0; j < g.dim; ++j) {
      a += m[i][j] * x[j];
      at += m[j][i] * x[j];
    }
    CHECK(y[i] == doctest::Approx(a).epsilon(1e-14));
    CHECK(yt[i] == doctest::Approx(at).epsilon(1e-14));
  }
}

TEST_CASE("no atoms, no tilt dependence") {
  const TiltedGenerator a = build_tilted(MaserParams{0.0, 0.0, kNu}, -0.7, 20);
  const TiltedGenerator b = build_tilted(MaserParams{0.0, 0.0, kNu}, 1.3, 20);
  CHECK(a.sub == b.sub);
  CHECK(a.diag == b.diag);
  for (std::size_t n = 0; n + 1 < a.dim; ++n) CHECK(a.sub[n] == doctest::Approx(kNu * (n + 1.0)));
}

TEST_CASE("build_tilted rejects tiny truncations") {
  CHECK_THROWS_AS(build_tilted(MaserParams{1.0, 1.0, kNu}, 0.0, 1), std::invalid_argument);
}

TEST_CASE("symmetrization at s = 0 is detailed balance") {
  const MaserParams p = MaserParams::from_alpha(50.0, 6.6, kNu);
  const std::size_t dim = 120;
  const StationaryDistribution ss = stationary_truncated(p, dim);
  const SymmetricTridiagonal sym = symmetrize(build_tilted(p, 0.0, dim));
  // G^2 pi constant, compared in logs to stay clear of underflow.
  const double ref = 2.0 * sym.log_scale[0] + std::log(ss.probs[0]);
  for (std::size_t n = 0; n < dim; ++n) {
    const double v = 2.0 * sym.log_scale[n] + std::log(ss.probs[n]);
    CHECK(std::abs(std::expm1(v - ref)) <= 1e-8);
  }
}

TEST_CASE("2x2 closed form") {
  const TiltedGenerator g = build_tilted(MaserParams::from_alpha(10.0, 2.0, kNu), 0.3, 2);
  const SymmetricTridiagonal sym = symmetrize(g);
  const auto ev = tridiag::eigenvalues(sym.diag, sym.off);
  const double tr = g.diag[0] + g.diag[1];
  const double det = g.diag[0] * g.diag[1] - g.sub[0] * g.sup[0];
  const double disc = std::sqrt(tr * tr - 4.0 * det);
  CHECK(ev[0] == doctest::Approx((tr + disc) / 2.0).epsilon(1e-13));
  CHECK(ev[1] == doctest::Approx((tr - disc) / 2.0).epsilon(1e-13));
}

TEST_CASE("symmetrized matrix is similar to M") {
  for (double s : {-0.8, 0.0, 0.6}) {
    const TiltedGenerator g = build_tilted(MaserParams::from_alpha(10.0, 2.0, kNu), s, 4);
    const SymmetricTridiagonal sym = symmetrize(g);
    const auto cm = char_poly(dense(g));
    const auto cs = char_poly(dense_sym(sym.diag, sym.off));
    for (std::size_t k = 0; k < cm.size(); ++k)
      CHECK(std::abs(cm[k] - cs[k]) <= 1e-10 * std::max(1.0, std::abs(cm[k])));
  }
}

TEST_CASE("symmetrize needs positive off-diagonals") {
  CHECK_THROWS_AS(symmetrize(build_tilted(MaserParams{5.0, 0.0, 0.0}, 0.0, 6)), std::domain_error);
}

TEST_CASE("spectrum equals the paper's symmetric form at s = 0") {
  const MaserParams p = MaserParams::from_alpha(50.0, 6.6, kNu);
  const std::size_t dim = 50;
  const RateTable t = rates(p, dim);
  std::vector<double> diag(dim), off(dim - 1);
  for (std::size_t j = 0; j < dim; ++j) diag[j] = -(t.birth[j] + t.death[j]);
  for (std::size_t j = 0; j + 1 < dim; ++j) off[j] = std::sqrt(t.birth[j]) * std::sqrt(t.death[j + 1]);
  const auto ref = tridiag::eigenvalues(diag, off);
  const SymmetricTridiagonal sym = symmetrize(build_tilted(p, 0.0, dim));
  const auto ev = tridiag::eigenvalues(sym.diag, sym.off);
  for (std::size_t k = 0; k < dim; ++k) CHECK(std::abs(ev[k] - ref[k]) <= 1e-9);
}

TEST_CASE("top eigenvalue by power iteration on M") {
  for (std::size_t dim : {50u, 400u}) {
    const TiltedGenerator g = build_tilted(MaserParams::from_alpha(10.0, 2.0, kNu), 0.3, dim);
    double shift = 0.0;
    for (double d : g.diag) shift = std::max(shift, -d);
    std::vector<double> x(dim, 1.0);
    double est = 0.0;
    for (int it = 0; it < 40000; ++it) {
      auto y = maser::apply(g, x);
      double norm = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        y[i] += shift * x[i];
        norm += y[i];
      }
      double xs = 0.0;
      for (double v : x) xs += v;
      est = norm / xs - shift;
      for (std::size_t i = 0; i < dim; ++i) x[i] = y[i] / norm;
    }
    const SymmetricTridiagonal sym = symmetrize(g);
    const auto top = tridiag::kth_largest(sym.diag, sym.off, 0);
    CHECK(est == doctest::Approx(top.hi).epsilon(1e-9));
  }
}

TEST_CASE("spectral bound is nondecreasing in s") {
  const MaserParams p = MaserParams::from_alpha(50.0, 6.6, kNu);
  double prev = -INFINITY;
  for (int i = -20; i <= 20; ++i) {
    const SymmetricTridiagonal sym = symmetrize(build_tilted(p, 0.1 * i, 300));
    const double top = tridiag::kth_largest(sym.diag, sym.off, 0).hi;
    CHECK(top >= prev);
    prev = top;
  }
}

TEST_CASE("discrete transfer") {
  const MaserParams p = MaserParams::from_alpha(10.0, 2.0, kNu);
  const DiscreteTiltedTransfer t0 = build_discrete(p, 0.0, 12);
  for (std::size_t n = 0; n < t0.dim; ++n) {
    CHECK(t0.up[n] + t0.stay[n] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(t0.up[n] >= 0.0);
    CHECK(t0.stay[n] >= 0.0);
  }

  // phi sqrt(4) = pi/2 puts level 3 at sin = 1.
  const MaserParams resonant{1.0, std::numbers::pi / 4.0, kNu};
  const DiscreteTiltedTransfer t = build_discrete(resonant, 0.7, 6);
  CHECK(t.up[3] == doctest::Approx(std::exp(0.7)).epsilon(1e-15));
  CHECK(std::abs(t.stay[3]) <= 1e-15);

  CHECK_THROWS_AS(build_discrete(p, 0.0, 1), std::invalid_argument);
}

TEST_CASE("discrete MGF equals word enumeration") {
  const MaserParams p{1.0, 0.9, kNu};
  for (double s : {-0.5, 0.0, 0.8}) {
    double brute = 0.0;
    for (unsigned word = 0; word < 8; ++word) {
      std::size_t n = 0;
      double prob = 1.0;
      int grounds = 0;
      for (int k = 0; k < 3; ++k) {
        const double g = std::pow(std::sin(0.9 * std::sqrt(n + 1.0)), 2);
        if (word >> k & 1u) {
          prob *= g;
          ++grounds;
          ++n;
        } else {
          prob *= 1.0 - g;
        }
      }
      brute += prob * std::exp(s * grounds);
    }
    CHECK(std::abs(discrete_mgf(build_discrete(p, s, 5), 3, 0) - brute) <= 1e-12);
  }
}

}  // TEST_SUITE
