#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "maser/generator.hpp"
#include "maser/params.hpp"

namespace maser {

/// Spectral data of the truncated tilted generator at one field value.
///
/// lambda is the spectral bound (top eigenvalue), i.e. the scaled cumulant
/// generating function of the count. right_vec is the Perron vector of M
/// (the stationary law at s = 0), left_vec the one of M^T (all ones at
/// s = 0); sum(right_vec) == 1 and <left_vec, right_vec> == 1.
struct SpectralResult {
  double s = 0.0;
  double lambda = 0.0;
  double dlambda = 0.0;  // d lambda / ds, Hellmann-Feynman
  double second = 0.0;   // second-largest eigenvalue
  double gap = 0.0;
  std::vector<double> right_vec;
  std::vector<double> left_vec;
  std::size_t dim_used = 0;
  bool converged = false;
  /// Top two eigenvalues closer than 1e-12. Cannot happen for an
  /// irreducible truncation; kept as a tripwire.
  bool degenerate = false;
  std::optional<std::vector<double>> spectrum;
};

struct SpectralOptions {
  double rel_tol = 1e-12;
  /// 0 picks the stationary truncation plus ceil(8 e^|s| sqrt(nex)) levels.
  std::size_t initial_dim = 0;
  /// 0 means 100 * max(1, nex).
  std::size_t max_dim = 0;
  bool with_spectrum = false;
};

/// Spectral data of the generator truncated to exactly `dim` levels.
SpectralResult spectral_at_dim(const MaserParams& params, double s, std::size_t dim,
                               bool with_spectrum = false);

/// Spectral bound with truncation control: the dimension is doubled until
/// lambda agrees between dim and 2 dim within rel_tol. The returned data
/// belong to the smaller of the two dimensions. Requires nu > 0. Hitting the
/// cap leaves converged == false and returns the best estimate.
SpectralResult spectral_bound(const MaserParams& params, double s,
                              const SpectralOptions& options = {});

/// lambda(s) - lambda_1(s). Throws std::runtime_error if the truncation did
/// not converge.
double spectral_gap(const MaserParams& params, double s, const SpectralOptions& options = {});

/// d lambda / ds = <l, (dM/ds) r>, where dM/ds has the single band
/// e^s counted[n] at (n+1, n). Throws std::runtime_error on non-convergence.
double lambda_derivative(const MaserParams& params, double s,
                         const SpectralOptions& options = {});

struct CumulantEstimates {
  double m = 0.0;  // limiting mean rate
  double V = 0.0;  // limiting variance rate
  std::vector<double> higher;  // cumulants 3..k_max
  double fd_step = 0.0;
  /// Significant digits cancelled by the stencil of order k (index k-2 for
  /// k = 2..k_max).
  std::vector<double> digits_lost;
  std::vector<bool> ill_conditioned;
};

/// Limiting cumulants k = 1..k_max (k_max <= 6). The first comes from the
/// Hellmann-Feynman derivative at s = 0; higher ones from central finite
/// differences of d lambda/ds with one Richardson step.
CumulantEstimates cumulants(const MaserParams& params, int k_max,
                            const SpectralOptions& options = {});

/// All eigenvalues of the symmetrized truncation on `dim` levels, sorted
/// descending.
std::vector<double> full_spectrum(const MaserParams& params, double s, std::size_t dim);

/// Location and sharpness of the steepest change of d lambda/ds inside
/// [-window, window] (the cross-over between a passive and an active phase).
struct Crossover {
  double rate_low = 0.0;   // d lambda/ds at -window
  double rate_high = 0.0;  // d lambda/ds at +window
  double s_mid = 0.0;      // where d lambda/ds is halfway between the two
  double width = 0.0;      // s-distance between the 25% and 75% points
  double max_curvature = 0.0;  // max of d^2 lambda/ds^2 found
  double s_at_max = 0.0;
};

/// Locates the cross-over by bisection on the monotone d lambda/ds, then
/// scans d^2 lambda/ds^2 (central differences of the analytic derivative)
/// on a grid scaled to the cross-over width.
Crossover crossover(const MaserParams& params, double window = 0.05,
                    const SpectralOptions& options = {});

enum class MgfMethod { uniformization, taylor, both };

struct MgfResult {
  double value = 0.0;           // uniformization if available, else Taylor
  double uniformization = 0.0;  // NaN when not computed
  double taylor = 0.0;          // NaN when not computed
  /// Tilted weight that crossed the truncation boundary.
  double leak = 0.0;
};

/// Exact finite-time moment generating function
///   E(e^{s Lambda_t}) = 1^T exp(t M_s) e_initial
/// on `dim` levels. Throws std::invalid_argument for t < 0 or
/// initial >= dim and std::overflow_error when t ||M|| needs more than
/// 1e9 steps.
MgfResult mgf_exact(const MaserParams& params, double s, double t, std::size_t initial,
                    std::size_t dim, MgfMethod method = MgfMethod::uniformization);

}  // namespace maser
