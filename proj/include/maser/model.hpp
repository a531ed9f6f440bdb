#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "maser/params.hpp"

namespace maser {

/// Per-level rates of the photon-number birth-death process.
///
/// birth[n] = counted[n] + nu (n + 1) is the total n -> n+1 rate,
/// counted[n] = nex sin^2(phi sqrt(n+1)) the part that comes with a
/// ground-state atom detection, death[n] = (nu + 1) n the n -> n-1 rate.
struct RateTable {
  std::size_t dim = 0;
  std::vector<double> birth;
  std::vector<double> death;
  std::vector<double> counted;
};

RateTable rates(const MaserParams& params, std::size_t dim);

struct StationaryDistribution {
  std::size_t dim = 0;
  std::vector<double> log_weights;  // unnormalized, log_weights[0] == 0
  std::vector<double> probs;
  double mean = 0.0;
  double variance = 0.0;
  double tail_mass = 0.0;  // mass on the last 5% of levels
};

struct StationaryOptions {
  double tail_tol = 1e-14;
  /// Hard cap on the truncation; 0 means 100 * max(1, nex).
  std::size_t max_dim = 0;
  std::size_t initial_dim = 32;
};

/// Stationary photon-number law, truncated adaptively until the mass on the
/// last 5% of levels and the geometric remainder bound are both below
/// `tail_tol`. Requires nu > 0. Throws std::runtime_error when the hard cap
/// is hit first.
StationaryDistribution stationary(const MaserParams& params,
                                  const StationaryOptions& options = {});

/// Stationary law on exactly `dim` levels (renormalized on the truncation).
StationaryDistribution stationary_truncated(const MaserParams& params,
                                            std::size_t dim);

/// The two expressions for the long-time count rate E(Lambda_t)/t.
struct MeanCountRate {
  double from_counts = 0.0;  // sum_n pi_n nex sin^2(phi sqrt(n+1))
  double from_mean = 0.0;    // <n> - nu
};

/// Evaluates both forms and throws std::runtime_error if they differ by
/// more than `rel_tol` (relative, with a 1e-12 absolute floor).
MeanCountRate mean_count_rate(const MaserParams& params,
                              const StationaryDistribution& ss,
                              double rel_tol = 1e-8);

struct EffectivePotential {
  std::vector<double> values;  // U(n) = -(log pi_n - log pi_0)
  std::vector<std::pair<double, double>> limit_samples;  // (x, v(x))
};

struct PotentialOptions {
  double x_max = 1.2;
  std::size_t samples = 121;
  double abs_tol = 1e-10;
};

EffectivePotential effective_potential(const MaserParams& params,
                                       const StationaryDistribution& ss,
                                       const PotentialOptions& options = {});

/// Infinite-pumping limit of U(n)/nex at x = n/nex:
///   v(x) = -int_0^x log[(nu + sin^2(alpha sqrt y)/y) / (nu + 1)] dy,
/// evaluated on an increasing grid starting at or above 0 by adaptive
/// Simpson quadrature. Throws std::runtime_error naming the offending x if
/// a panel fails to converge.
std::vector<double> limit_potential(double alpha, double nu,
                                    const std::vector<double>& x_grid,
                                    double abs_tol = 1e-10);

enum class ExtremumKind { max, min, degenerate };

std::string to_string(ExtremumKind kind);

struct Intersection {
  double theta = 0.0;
  ExtremumKind kind = ExtremumKind::max;
};

/// Nontrivial solutions theta in (0, theta_max] of |sin theta| = theta/alpha,
/// where the rescaled birth (sin^2) and death (theta^2/alpha^2) curves cross
/// in the nex -> infinity limit. Ordered by theta. The condition does not
/// depend on nu; the argument is kept so call sites mirror `rates`.
std::vector<Intersection> rate_intersections(
    double alpha, double nu, std::optional<double> theta_max = std::nullopt);

/// Photon number corresponding to a crossing: n ~ nex theta^2 / alpha^2.
inline double intersection_level(double theta, double nex, double alpha) {
  return nex * theta * theta / (alpha * alpha);
}

/// Indices of strict local maxima (level 0 counts if probs[0] > probs[1]).
std::vector<std::size_t> local_maxima(const std::vector<double>& probs);
std::vector<std::size_t> local_minima(const std::vector<double>& probs);

}  // namespace maser
