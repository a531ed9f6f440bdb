#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "maser/params.hpp"

namespace maser {

/// Truncated tilted generator of the photon-number dynamics, restricted to
/// diagonal states.
///
/// Convention: the matrix M acts on probability column vectors p (master
/// equation picture), dp/dt = M p. The observable (Heisenberg) picture uses
/// M^T; both have the same spectrum. Bands:
///   M(n+1, n) = sub[n]  = e^s counted[n] + nu (n+1)      (births)
///   M(n, n+1) = sup[n]  = (nu + 1)(n + 1)                (deaths)
///   M(n, n)   = diag[n] = -(birth[n] + death[n])         (untilted loss)
/// Levels >= dim are dropped, so level dim-1 leaks its birth rate.
///
/// Detection of an excited atom (jump operator L2) leaves the photon number
/// unchanged and cancels against its own loss term, so it does not appear.
struct TiltedGenerator {
  double s = 0.0;
  std::size_t dim = 0;
  std::vector<double> sub;      // size dim-1
  std::vector<double> sup;      // size dim-1
  std::vector<double> diag;     // size dim
  std::vector<double> counted;  // untilted counted rates, size dim
  std::vector<double> birth;    // untilted total birth rates, size dim
  std::vector<double> death;    // death rates, death[0] == 0, size dim
  std::vector<double> sym_off;  // sqrt(sub * sup), size dim-1
  /// log g_n of the similarity G = diag(g) with G M G^-1 symmetric;
  /// g_0 = 1 and g_{n+1}/g_n = sqrt(sup_n / sub_n). Empty if some
  /// off-diagonal vanishes.
  std::vector<double> log_scale;

  /// exp(log_scale); may overflow for very large truncations.
  [[nodiscard]] std::vector<double> scale() const;
};

TiltedGenerator build_tilted(const MaserParams& params, double s, std::size_t dim);

/// Symmetric tridiagonal S = G M G^-1: same diagonal, off-diagonals
/// sqrt(sub_n sup_n). A right eigenvector of M is G^-1 v and a left one is
/// G v for an eigenvector v of S.
struct SymmetricTridiagonal {
  std::vector<double> diag;
  std::vector<double> off;
  std::vector<double> log_scale;

  [[nodiscard]] std::size_t size() const { return diag.size(); }
};

/// Throws std::domain_error when an off-diagonal entry is not strictly
/// positive (only possible for nu == 0).
SymmetricTridiagonal symmetrize(const TiltedGenerator& gen);

/// y = M x
std::vector<double> apply(const TiltedGenerator& gen, std::span<const double> x);
/// y = M^T x
std::vector<double> apply_transpose(const TiltedGenerator& gen, std::span<const double> x);

/// Tilted one-atom transfer operator on diagonal states: an atom detected in
/// the ground state moves n -> n+1 with weight e^s sin^2(phi sqrt(n+1)); an
/// excited detection keeps n with weight cos^2(phi sqrt(n+1)).
struct DiscreteTiltedTransfer {
  double s = 0.0;
  std::size_t dim = 0;
  std::vector<double> up;
  std::vector<double> stay;
};

DiscreteTiltedTransfer build_discrete(const MaserParams& params, double s, std::size_t dim);

/// Applies the tilted transfer operator once to a weight vector. Mass moved
/// above level dim-1 is dropped.
std::vector<double> step(const DiscreteTiltedTransfer& transfer, std::span<const double> p);

/// E(e^{s Lambda_n}) after `steps` atoms, starting from Fock state `initial`.
double discrete_mgf(const DiscreteTiltedTransfer& transfer, std::size_t steps,
                    std::size_t initial);

}  // namespace maser
