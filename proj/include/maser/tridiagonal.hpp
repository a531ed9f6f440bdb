#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace maser::tridiag {

// Routines for real symmetric tridiagonal matrices given by their diagonal
// (size n) and off-diagonal (size n-1).

/// Number of eigenvalues strictly below x (Sturm sequence / LDL^T inertia).
std::size_t count_below(std::span<const double> diag, std::span<const double> off, double x);

struct Interval {
  double lo;
  double hi;
};

/// Gershgorin enclosure of the spectrum.
Interval gershgorin(std::span<const double> diag, std::span<const double> off);

/// k-th largest eigenvalue (k = 0 is the top one) by bisection on Sturm
/// counts. Returns the final bracket; its width is at the level of double
/// rounding.
Interval kth_largest(std::span<const double> diag, std::span<const double> off, std::size_t k);

/// All eigenvalues by implicit QL with Wilkinson shifts, sorted descending.
/// Throws std::runtime_error if an eigenvalue fails to converge.
std::vector<double> eigenvalues(std::span<const double> diag, std::span<const double> off);

}  // namespace maser::tridiag
