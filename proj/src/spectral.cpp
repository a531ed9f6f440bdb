#include "maser/spectral.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "maser/model.hpp"
#include "maser/tridiagonal.hpp"

namespace maser {

namespace {

double log_sum_exp(const std::vector<double>& xs) {
  const double peak = *std::max_element(xs.begin(), xs.end());
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - peak);
  return peak + std::log(acc);
}

std::size_t default_cap(const MaserParams& params) {
  return static_cast<std::size_t>(100.0 * std::max(1.0, params.nex));
}

std::size_t default_initial_dim(const MaserParams& params, double s) {
  StationaryOptions so;
  so.tail_tol = 1e-14;
  std::size_t base;
  try {
    base = stationary(params, so).dim;
  } catch (const std::runtime_error&) {
    base = default_cap(params) / 2;
  }
  const double margin = std::ceil(8.0 * std::exp(std::abs(s)) * std::sqrt(params.nex));
  return base + static_cast<std::size_t>(margin);
}

}  // namespace

namespace {

// Order-preserving map between doubles and unsigned integers, so that
// bisection can run down to adjacent representable numbers.
std::uint64_t order_key(double x) {
  const auto u = std::bit_cast<std::uint64_t>(x);
  return (u >> 63) ? ~u : (u | (std::uint64_t{1} << 63));
}

double from_order_key(std::uint64_t k) {
  const std::uint64_t u = (k >> 63) ? (k & ~(std::uint64_t{1} << 63)) : ~k;
  return std::bit_cast<double>(u);
}

// LDL^T pivots of S - x I written in terms of the rates. With
// diag_n = -(b_n + d_n) and off_n^2 = bt_n d_{n+1} (bt the tilted birth rate),
// the forward pivots are -(b_n + x + phi_n) with
//   phi_0 = 0,  phi_n = d_n (kappa_{n-1} + x + phi_{n-1}) / (b_{n-1} + x + phi_{n-1}),
// kappa_n = b_n - bt_n = -(e^s - 1) c_n, and the backward pivots are
// -(d_n + x + chi_n) with
//   chi_{N-1} = b_{N-1},
//   chi_n = (kappa_n d_{n+1} + b_n (x + chi_{n+1})) / (d_{n+1} + x + chi_{n+1}).
// No quantity is formed as a difference of large rates, so eigenvalues near 0
// and the Perron vector keep full relative accuracy.
class RatePivots {
 public:
  explicit RatePivots(const TiltedGenerator& gen) : gen_(gen), kappa_(gen.dim) {
    const double em1 = std::expm1(gen.s);
    for (std::size_t n = 0; n < gen.dim; ++n) kappa_[n] = -em1 * gen.counted[n];
  }

  // Number of eigenvalues strictly above x (positive pivots).
  std::size_t count_above(double x) const {
    std::size_t count = 0;
    double phi = 0.0;
    double prev = 0.0;  // b_{n-1} + x + phi_{n-1}
    for (std::size_t n = 0; n < gen_.dim; ++n) {
      if (n > 0) phi = gen_.death[n] * ((kappa_[n - 1] + x) + phi) / prev;
      double p = gen_.birth[n] + x + phi;
      if (p == 0.0) p = std::numeric_limits<double>::min();
      if (p < 0.0) ++count;
      prev = p;
    }
    return count;
  }

  // k-th largest eigenvalue bracketed between adjacent doubles.
  tridiag::Interval kth_largest(std::size_t k) const {
    const auto g = tridiag::gershgorin(gen_.diag, gen_.sym_off);
    std::uint64_t lo = order_key(g.lo);
    std::uint64_t hi = order_key(g.hi);
    while (hi - lo > 1) {
      const std::uint64_t mid = lo + (hi - lo) / 2;
      if (count_above(from_order_key(mid)) > k)
        lo = mid;
      else
        hi = mid;
    }
    return {from_order_key(lo), from_order_key(hi)};
  }

  struct LogVectors {
    std::vector<double> right;
    std::vector<double> left;
  };

  // Perron vectors of M from the twisted factorization at x >= top eigenvalue.
  LogVectors perron(double x) const {
    const std::size_t dim = gen_.dim;
    std::vector<double> fwd(dim), bwd(dim);  // b + x + phi, d + x + chi
    std::vector<double> phi(dim, 0.0), chi(dim, 0.0);
    fwd[0] = positive(gen_.birth[0] + x);
    for (std::size_t n = 1; n < dim; ++n) {
      phi[n] = gen_.death[n] * ((kappa_[n - 1] + x) + phi[n - 1]) / fwd[n - 1];
      fwd[n] = positive(gen_.birth[n] + x + phi[n]);
    }
    chi[dim - 1] = gen_.birth[dim - 1];
    bwd[dim - 1] = positive(gen_.death[dim - 1] + x + chi[dim - 1]);
    for (std::size_t n = dim - 1; n-- > 0;) {
      chi[n] = (kappa_[n] * gen_.death[n + 1] + gen_.birth[n] * (x + chi[n + 1])) / bwd[n + 1];
      bwd[n] = positive(gen_.death[n] + x + chi[n]);
    }

    // |gamma_k| = |x + phi_k + chi_k|
    std::size_t twist = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < dim; ++k) {
      const double gamma = std::abs(x + phi[k] + chi[k]);
      if (gamma < best) {
        best = gamma;
        twist = k;
      }
    }

    LogVectors v{std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0)};
    for (std::size_t n = twist; n-- > 0;) {
      v.right[n] = v.right[n + 1] + std::log(gen_.death[n + 1] / fwd[n]);
      v.left[n] = v.left[n + 1] + std::log(gen_.sub[n] / fwd[n]);
    }
    for (std::size_t n = twist + 1; n < dim; ++n) {
      v.right[n] = v.right[n - 1] + std::log(gen_.sub[n - 1] / bwd[n]);
      v.left[n] = v.left[n - 1] + std::log(gen_.death[n] / bwd[n]);
    }
    return v;
  }

 private:
  static double positive(double q) { return q > 0.0 ? q : std::numeric_limits<double>::min(); }

  const TiltedGenerator& gen_;
  std::vector<double> kappa_;
};

}  // namespace

SpectralResult spectral_at_dim(const MaserParams& params, double s, std::size_t dim,
                               bool with_spectrum) {
  const TiltedGenerator gen = build_tilted(params, s, dim);
  const SymmetricTridiagonal sym = symmetrize(gen);
  const RatePivots pivots(gen);

  SpectralResult res;
  res.s = s;
  res.dim_used = dim;
  const auto top = pivots.kth_largest(0);
  const auto next = pivots.kth_largest(1);
  res.lambda = top.hi;
  res.second = next.hi;
  res.gap = res.lambda - res.second;
  res.degenerate = res.gap <= 1e-12;

  const auto logs = pivots.perron(top.hi);
  const double lse_r = log_sum_exp(logs.right);
  std::vector<double> log_lr(dim);
  for (std::size_t n = 0; n < dim; ++n) log_lr[n] = logs.left[n] + logs.right[n] - lse_r;
  const double lse_lr = log_sum_exp(log_lr);
  res.right_vec.resize(dim);
  res.left_vec.resize(dim);
  for (std::size_t n = 0; n < dim; ++n) {
    res.right_vec[n] = std::exp(logs.right[n] - lse_r);
    res.left_vec[n] = std::exp(logs.left[n] - lse_lr);
  }

  // <l, dM/ds r> with <l, r> = 1
  const double tilt = std::exp(s);
  double num = 0.0;
  for (std::size_t n = 0; n + 1 < dim; ++n) {
    if (gen.counted[n] == 0.0) continue;
    num += tilt * gen.counted[n] *
           std::exp(logs.left[n + 1] + logs.right[n] - lse_r - lse_lr);
  }
  res.dlambda = num;

  if (with_spectrum) res.spectrum = tridiag::eigenvalues(sym.diag, sym.off);
  return res;
}

SpectralResult spectral_bound(const MaserParams& params, double s, const SpectralOptions& options) {
  params.validate();
  if (!(params.nu > 0.0)) throw std::invalid_argument("spectral_bound: nu must be > 0");
  if (!(options.rel_tol >= 1e-14 && options.rel_tol <= 1e-6))
    throw std::invalid_argument("spectral_bound: rel_tol must lie in [1e-14, 1e-6]");

  const std::size_t cap = options.max_dim > 0 ? options.max_dim : default_cap(params);
  std::size_t dim = options.initial_dim > 0 ? options.initial_dim : default_initial_dim(params, s);
  dim = std::clamp<std::size_t>(dim, 2, cap);

  SpectralResult cur = spectral_at_dim(params, s, dim, options.with_spectrum);
  for (;;) {
    const std::size_t bigger = std::min(cap, 2 * dim);
    if (bigger == dim) {
      cur.converged = false;
      return cur;
    }
    SpectralResult next = spectral_at_dim(params, s, bigger, options.with_spectrum);
    if (std::abs(next.lambda - cur.lambda) <= options.rel_tol * std::abs(next.lambda) + 1e-13) {
      cur.converged = true;
      return cur;
    }
    cur = std::move(next);
    dim = bigger;
  }
}

double spectral_gap(const MaserParams& params, double s, const SpectralOptions& options) {
  const SpectralResult r = spectral_bound(params, s, options);
  if (!r.converged) {
    std::ostringstream msg;
    msg << "spectral_gap: truncation did not converge at s=" << s << " (dim " << r.dim_used << ")";
    throw std::runtime_error(msg.str());
  }
  return r.gap;
}

double lambda_derivative(const MaserParams& params, double s, const SpectralOptions& options) {
  const SpectralResult r = spectral_bound(params, s, options);
  if (!r.converged) {
    std::ostringstream msg;
    msg << "lambda_derivative: truncation did not converge at s=" << s << " (dim "
        << r.dim_used << ")";
    throw std::runtime_error(msg.str());
  }
  return r.dlambda;
}

namespace {

// Central O(h^2) stencils for derivative orders 1..5, as (offset, weight)
// with the result divided by h^order.
struct Stencil {
  int order;
  std::vector<std::pair<int, double>> taps;
};

const std::array<Stencil, 5>& stencils() {
  static const std::array<Stencil, 5> table{{
      {1, {{-1, -0.5}, {1, 0.5}}},
      {2, {{-1, 1.0}, {0, -2.0}, {1, 1.0}}},
      {3, {{-2, -0.5}, {-1, 1.0}, {1, -1.0}, {2, 0.5}}},
      {4, {{-2, 1.0}, {-1, -4.0}, {0, 6.0}, {1, -4.0}, {2, 1.0}}},
      {5, {{-3, -0.5}, {-2, 2.0}, {-1, -2.5}, {1, 2.5}, {2, -2.0}, {3, 0.5}}},
  }};
  return table;
}

struct FdValue {
  double value;
  double digits_lost;
};

template <class F>
FdValue apply_stencil(const F& f, const Stencil& st, double h) {
  double sum = 0.0;
  double mag = 0.0;
  for (const auto& [off, w] : st.taps) {
    const double v = w * f(off * h);
    sum += v;
    mag += std::abs(v);
  }
  const double lost = (mag == 0.0) ? 0.0 : (sum == 0.0 ? 16.0 : std::log10(mag / std::abs(sum)));
  return {sum / std::pow(h, st.order), lost};
}

}  // namespace

CumulantEstimates cumulants(const MaserParams& params, int k_max, const SpectralOptions& options) {
  if (k_max < 1 || k_max > 6) throw std::invalid_argument("cumulants: k_max must lie in [1, 6]");
  auto dlam = [&](double s) { return lambda_derivative(params, s, options); };

  CumulantEstimates out;
  out.m = dlam(0.0);

  const double h0 = 1e-3;
  const double curvature = (dlam(h0) - dlam(-h0)) / (2.0 * h0);
  const double scale = 1.0 / std::sqrt(std::max(1.0, std::abs(curvature)));
  const double h = 1e-3 * scale;
  out.fd_step = h;

  // Higher stencils divide by h^(k-1). The step is widened until the
  // cancellation leaves at least ten digits of d lambda/ds, capped at 0.2.
  constexpr std::array<double, 5> kStepFactor{1e-3, 1e-2, 3e-2, 6e-2, 1e-1};
  constexpr double kMaxStep = 0.2;
  const int top = std::max(k_max, 2);
  for (int k = 2; k <= top; ++k) {
    const Stencil& st = stencils()[static_cast<std::size_t>(k - 2)];
    double hk = kStepFactor[static_cast<std::size_t>(k - 2)] * scale;
    FdValue coarse = apply_stencil(dlam, st, hk);
    FdValue fine = apply_stencil(dlam, st, 0.5 * hk);
    while (k > 2 && std::max(coarse.digits_lost, fine.digits_lost) > 5.0 &&
           2.0 * hk <= kMaxStep) {
      hk *= 2.0;
      fine = coarse;
      coarse = apply_stencil(dlam, st, hk);
    }
    const double value = (4.0 * fine.value - coarse.value) / 3.0;
    const double lost = std::max(coarse.digits_lost, fine.digits_lost);
    out.digits_lost.push_back(lost);
    out.ill_conditioned.push_back(lost > 6.0);
    if (k == 2)
      out.V = value;
    else
      out.higher.push_back(value);
  }
  return out;
}

Crossover crossover(const MaserParams& params, double window, const SpectralOptions& options) {
  if (!(window > 0.0)) throw std::invalid_argument("crossover: window must be > 0");
  auto dlam = [&](double s) { return lambda_derivative(params, s, options); };
  Crossover c;
  c.rate_low = dlam(-window);
  c.rate_high = dlam(window);
  const double span = c.rate_high - c.rate_low;

  auto solve = [&](double frac) {
    const double target = c.rate_low + frac * span;
    double lo = -window, hi = window;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (dlam(mid) < target)
        lo = mid;
      else
        hi = mid;
    }
    return 0.5 * (lo + hi);
  };
  c.s_mid = solve(0.5);
  c.width = solve(0.75) - solve(0.25);
  if (!(c.width > 0.0)) c.width = std::abs(c.s_mid) * 1e-12 + 1e-300;

  // d^2 lambda / ds^2 on a grid a few widths around the midpoint.
  const double step = c.width / 200.0;
  for (int i = -400; i <= 400; ++i) {
    const double s = c.s_mid + i * (c.width / 100.0);
    const double curv = (dlam(s + step) - dlam(s - step)) / (2.0 * step);
    if (curv > c.max_curvature) {
      c.max_curvature = curv;
      c.s_at_max = s;
    }
  }
  return c;
}

std::vector<double> full_spectrum(const MaserParams& params, double s, std::size_t dim) {
  const SymmetricTridiagonal sym = symmetrize(build_tilted(params, s, dim));
  return tridiag::eigenvalues(sym.diag, sym.off);
}

namespace {

// Generator on dim levels plus an absorbing sink collecting the (tilted)
// weight that is born above level dim-1.
struct SinkGenerator {
  TiltedGenerator gen;
  double sink_rate;

  std::vector<double> apply(const std::vector<double>& x) const {
    std::vector<double> y = maser::apply(gen, std::span<const double>(x.data(), gen.dim));
    y.push_back(sink_rate * x[gen.dim - 1]);
    return y;
  }

  double norm1() const {
    double best = 0.0;
    for (std::size_t n = 0; n < gen.dim; ++n) {
      double col = std::abs(gen.diag[n]);
      if (n + 1 < gen.dim) col += gen.sub[n];
      if (n > 0) col += gen.sup[n - 1];
      if (n + 1 == gen.dim) col += sink_rate;
      best = std::max(best, col);
    }
    return best;
  }
};

double l1(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += std::abs(x);
  return acc;
}

std::vector<double> expm_uniformization(const SinkGenerator& g, double t, std::vector<double> w) {
  double q = 0.0;
  for (double d : g.gen.diag) q = std::max(q, -d);
  if (q == 0.0 || t == 0.0) return w;

  // P = I + A/q is entrywise non-negative; its column sums bound ||P||_1.
  double rho = 0.0;
  for (std::size_t n = 0; n < g.gen.dim; ++n) {
    double col = 1.0 + g.gen.diag[n] / q;
    if (n + 1 < g.gen.dim) col += g.gen.sub[n] / q;
    if (n > 0) col += g.gen.sup[n - 1] / q;
    if (n + 1 == g.gen.dim) col += g.sink_rate / q;
    rho = std::max(rho, col);
  }
  rho = std::max(rho, 1.0);

  constexpr double kChunk = 20.0;
  const double total = q * t;
  if (total > 1e9) throw std::overflow_error("mgf_exact: t * ||M|| too large for uniformization");
  const auto chunks = static_cast<std::size_t>(std::ceil(total / kChunk));
  const double qtau = total / static_cast<double>(chunks);
  const double damp = std::exp(-qtau);

  for (std::size_t c = 0; c < chunks; ++c) {
    std::vector<double> term = w;
    std::vector<double> sum = w;
    const double w_norm = l1(w);
    double coeff = 1.0;  // (q tau)^k / k!
    double bound = 1.0;  // (q tau rho)^k / k!
    for (int k = 1; k < 100000; ++k) {
      std::vector<double> next = g.apply(term);
      for (std::size_t i = 0; i < next.size(); ++i) next[i] = term[i] + next[i] / q;
      term = std::move(next);
      coeff *= qtau / k;
      bound *= qtau * rho / k;
      for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += coeff * term[i];
      const double ratio = qtau * rho / (k + 1);
      if (ratio < 0.5) {
        const double remainder = bound * ratio / (1.0 - ratio) * w_norm;
        if (remainder <= 1e-18 * l1(sum)) break;
      }
    }
    for (double& x : sum) x *= damp;
    w = std::move(sum);
  }
  return w;
}

std::vector<double> expm_taylor(const SinkGenerator& g, double t, std::vector<double> w) {
  const double norm = g.norm1();
  if (norm == 0.0 || t == 0.0) return w;
  const double steps_needed = std::ceil(t * norm / 0.5);
  if (steps_needed > 1e9) throw std::overflow_error("mgf_exact: t * ||M|| too large for Taylor");
  const auto steps = static_cast<std::size_t>(steps_needed);
  const double tau = t / static_cast<double>(steps);
  const double a_norm = tau * norm;

  for (std::size_t c = 0; c < steps; ++c) {
    std::vector<double> term = w;
    std::vector<double> sum = w;
    const double w_norm = l1(w);
    double bound = 1.0;  // ||A||^k / k!
    for (int k = 1; k < 200; ++k) {
      term = g.apply(term);
      for (double& x : term) x *= tau / k;
      for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += term[i];
      bound *= a_norm / k;
      // ||sum_{j>k} A^j/j!|| <= ||A||^{k+1}/(k+1)! / (1 - ||A||/(k+2))
      const double remainder = bound * a_norm / (k + 1) / (1.0 - a_norm / (k + 2)) * w_norm;
      if (remainder <= 1e-18 * l1(sum)) break;
    }
    w = std::move(sum);
  }
  return w;
}

}  // namespace

MgfResult mgf_exact(const MaserParams& params, double s, double t, std::size_t initial,
                    std::size_t dim, MgfMethod method) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("mgf_exact: t must be finite and >= 0");
  if (initial >= dim) throw std::invalid_argument("mgf_exact: initial level must be < dim");
  SinkGenerator g{build_tilted(params, s, dim), 0.0};
  g.sink_rate = std::exp(s) * g.gen.counted[dim - 1] + params.nu * static_cast<double>(dim);

  std::vector<double> start(dim + 1, 0.0);
  start[initial] = 1.0;

  const double nan = std::numeric_limits<double>::quiet_NaN();
  MgfResult out{nan, nan, nan, nan};
  auto finish = [&](const std::vector<double>& w) {
    double acc = 0.0;
    for (std::size_t n = 0; n < dim; ++n) acc += w[n];
    return std::pair{acc, w[dim]};
  };
  if (method != MgfMethod::taylor) {
    const auto [v, leak] = finish(expm_uniformization(g, t, start));
    out.uniformization = v;
    out.value = v;
    out.leak = leak;
  }
  if (method != MgfMethod::uniformization) {
    const auto [v, leak] = finish(expm_taylor(g, t, start));
    out.taylor = v;
    if (method == MgfMethod::taylor) {
      out.value = v;
      out.leak = leak;
    }
  }
  return out;
}

}  // namespace maser
