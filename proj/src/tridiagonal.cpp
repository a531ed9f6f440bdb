#include "maser/tridiagonal.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace maser::tridiag {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = std::numeric_limits<double>::min();

void check_shape(std::span<const double> diag, std::span<const double> off) {
  if (diag.empty() || off.size() + 1 != diag.size())
    throw std::invalid_argument("tridiagonal: off-diagonal must have size n-1");
}

}  // namespace

std::size_t count_below(std::span<const double> diag, std::span<const double> off, double x) {
  std::size_t count = 0;
  double q = diag[0] - x;
  for (std::size_t i = 0;; ++i) {
    if (q == 0.0) q = -kEps * (std::abs(x) + kTiny);
    if (q < 0.0) ++count;
    if (i + 1 == diag.size()) break;
    q = diag[i + 1] - x - off[i] * off[i] / q;
  }
  return count;
}

Interval gershgorin(std::span<const double> diag, std::span<const double> off) {
  check_shape(diag, off);
  Interval iv{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < diag.size(); ++i) {
    double r = 0.0;
    if (i > 0) r += std::abs(off[i - 1]);
    if (i < off.size()) r += std::abs(off[i]);
    iv.lo = std::min(iv.lo, diag[i] - r);
    iv.hi = std::max(iv.hi, diag[i] + r);
  }
  const double pad = kEps * std::max(std::abs(iv.lo), std::abs(iv.hi)) + kTiny;
  iv.lo -= pad;
  iv.hi += pad;
  return iv;
}

Interval kth_largest(std::span<const double> diag, std::span<const double> off, std::size_t k) {
  check_shape(diag, off);
  if (k >= diag.size()) throw std::invalid_argument("kth_largest: index out of range");
  // Ascending index of the wanted eigenvalue.
  const std::size_t j = diag.size() - 1 - k;
  Interval iv = gershgorin(diag, off);
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (iv.lo + iv.hi);
    if (mid <= iv.lo || mid >= iv.hi) break;
    if (iv.hi - iv.lo <= 2.0 * kEps * std::max(std::abs(iv.lo), std::abs(iv.hi))) break;
    if (count_below(diag, off, mid) > j)
      iv.hi = mid;
    else
      iv.lo = mid;
  }
  return iv;
}

std::vector<double> eigenvalues(std::span<const double> diag, std::span<const double> off) {
  check_shape(diag, off);
  const int n = static_cast<int>(diag.size());
  std::vector<double> d(diag.begin(), diag.end());
  std::vector<double> e(n, 0.0);
  std::copy(off.begin(), off.end(), e.begin());

  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= kEps * dd) break;
      }
      if (m != l) {
        if (iter++ == 100) throw std::runtime_error("tridiag::eigenvalues: QL iteration did not converge");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        int i;
        for (i = m - 1; i >= l; --i) {
          const double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
        }
        if (r == 0.0 && i >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
  std::sort(d.begin(), d.end(), std::greater<>());
  return d;
}

}  // namespace maser::tridiag
