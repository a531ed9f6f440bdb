#pragma once

#include <cmath>
#include <stdexcept>

namespace maser {

/// Physical parameters of the atom maser.
///
/// `nex` is the mean number of atoms per cavity decay time, `phi` the
/// accumulated Rabi angle and `nu` the thermal occupation of the bath.
/// The pumping parameter alpha = sqrt(nex) * phi is always derived.
struct MaserParams {
  double nex = 0.0;
  double phi = 0.0;
  double nu = 0.0;

  [[nodiscard]] double alpha() const { return std::sqrt(nex) * phi; }

  /// Parameters specified through alpha instead of phi. With nex == 0 the
  /// Rabi angle is irrelevant and set to zero.
  static MaserParams from_alpha(double nex, double alpha, double nu) {
    MaserParams p;
    p.nex = nex;
    p.nu = nu;
    p.phi = nex > 0.0 ? alpha / std::sqrt(nex) : 0.0;
    return p;
  }

  [[nodiscard]] bool finite() const {
    return std::isfinite(nex) && std::isfinite(phi) && std::isfinite(nu);
  }

  /// Throws std::invalid_argument unless all fields are finite and >= 0.
  void validate() const {
    if (!finite()) throw std::invalid_argument("maser parameters must be finite");
    if (nex < 0.0 || phi < 0.0 || nu < 0.0)
      throw std::invalid_argument("maser parameters must be non-negative");
  }
};

/// Probability that an atom leaves the cavity in the ground state when the
/// field holds `n` photons: sin^2(phi * sqrt(n + 1)).
inline double ground_probability(const MaserParams& p, std::size_t n) {
  const double s = std::sin(p.phi * std::sqrt(static_cast<double>(n) + 1.0));
  return s * s;
}

}  // namespace maser
