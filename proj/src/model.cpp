#include "maser/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace maser {

namespace {

void check_params(const MaserParams& params) {
  params.validate();
}

// log of pi_n / pi_{n-1}, n >= 1
double log_ratio(const MaserParams& p, std::size_t n) {
  const double k = static_cast<double>(n);
  const double s = std::sin(p.phi * std::sqrt(k));
  return std::log(p.nu / (p.nu + 1.0) + (p.nex / (p.nu + 1.0)) * s * s / k);
}

StationaryDistribution normalize(std::vector<double> log_weights) {
  StationaryDistribution ss;
  ss.dim = log_weights.size();
  const double peak = *std::max_element(log_weights.begin(), log_weights.end());
  ss.probs.resize(ss.dim);
  double total = 0.0;
  for (std::size_t n = 0; n < ss.dim; ++n) {
    ss.probs[n] = std::exp(log_weights[n] - peak);
    total += ss.probs[n];
  }
  for (double& p : ss.probs) p /= total;

  double mean = 0.0;
  for (std::size_t n = 0; n < ss.dim; ++n) mean += static_cast<double>(n) * ss.probs[n];
  double var = 0.0;
  for (std::size_t n = 0; n < ss.dim; ++n) {
    const double d = static_cast<double>(n) - mean;
    var += d * d * ss.probs[n];
  }
  ss.mean = mean;
  ss.variance = var;

  const std::size_t tail_levels = std::max<std::size_t>(1, (ss.dim + 19) / 20);
  double tail = 0.0;
  for (std::size_t n = ss.dim - tail_levels; n < ss.dim; ++n) tail += ss.probs[n];
  ss.tail_mass = tail;
  ss.log_weights = std::move(log_weights);
  return ss;
}

}  // namespace

RateTable rates(const MaserParams& params, std::size_t dim) {
  if (dim < 2) throw std::invalid_argument("rates: dim must be >= 2");
  check_params(params);
  RateTable t;
  t.dim = dim;
  t.birth.resize(dim);
  t.death.resize(dim);
  t.counted.resize(dim);
  for (std::size_t n = 0; n < dim; ++n) {
    const double k = static_cast<double>(n);
    t.counted[n] = params.nex * ground_probability(params, n);
    t.birth[n] = t.counted[n] + params.nu * (k + 1.0);
    t.death[n] = (params.nu + 1.0) * k;
  }
  return t;
}

StationaryDistribution stationary_truncated(const MaserParams& params, std::size_t dim) {
  check_params(params);
  if (dim < 2) throw std::invalid_argument("stationary: dim must be >= 2");
  if (!(params.nu > 0.0)) throw std::invalid_argument("stationary: nu must be > 0");
  std::vector<double> lw(dim, 0.0);
  for (std::size_t n = 1; n < dim; ++n) lw[n] = lw[n - 1] + log_ratio(params, n);
  return normalize(std::move(lw));
}

StationaryDistribution stationary(const MaserParams& params, const StationaryOptions& options) {
  check_params(params);
  if (!(params.nu > 0.0)) throw std::invalid_argument("stationary: nu must be > 0");
  if (!(options.tail_tol > 0.0) || options.tail_tol > 1e-6)
    throw std::invalid_argument("stationary: tail_tol must lie in (0, 1e-6]");

  const std::size_t cap = options.max_dim > 0
                              ? options.max_dim
                              : static_cast<std::size_t>(100.0 * std::max(1.0, params.nex));
  std::size_t dim = std::max<std::size_t>(options.initial_dim, 2);
  dim = std::min(dim, cap);

  // Log weights are extended incrementally as the truncation grows.
  std::vector<double> lw{0.0};
  for (;;) {
    while (lw.size() < dim) lw.push_back(lw.back() + log_ratio(params, lw.size()));
    StationaryDistribution ss = normalize(lw);

    // Every ratio beyond `dim` is bounded by nu/(nu+1) + nex/((nu+1) dim).
    const double r = params.nu / (params.nu + 1.0) +
                     params.nex / ((params.nu + 1.0) * static_cast<double>(dim));
    const double remainder = r < 1.0 ? ss.probs.back() * r / (1.0 - r)
                                     : std::numeric_limits<double>::infinity();
    if (ss.tail_mass < options.tail_tol && remainder < options.tail_tol) return ss;
    if (dim >= cap) {
      std::ostringstream msg;
      msg << "stationary: truncation did not converge below tail_tol=" << options.tail_tol
          << " within hard cap dim=" << cap << " (tail mass " << ss.tail_mass << ")";
      throw std::runtime_error(msg.str());
    }
    dim = std::min(cap, std::max(dim + 1, dim * 3 / 2));
  }
}

MeanCountRate mean_count_rate(const MaserParams& params, const StationaryDistribution& ss,
                              double rel_tol) {
  MeanCountRate out;
  double counts = 0.0;
  for (std::size_t n = 0; n < ss.dim; ++n)
    counts += ss.probs[n] * params.nex * ground_probability(params, n);
  out.from_counts = counts;
  out.from_mean = ss.mean - params.nu;
  const double diff = std::abs(out.from_counts - out.from_mean);
  const double scale = std::max(std::abs(out.from_counts), std::abs(out.from_mean));
  if (diff > rel_tol * scale + 1e-12) {
    std::ostringstream msg;
    msg << "mean_count_rate: identity violated, counts form " << out.from_counts
        << " vs mean form " << out.from_mean << " (truncation dim " << ss.dim << ")";
    throw std::runtime_error(msg.str());
  }
  return out;
}

namespace {

// Integrand of v(x); the y -> 0 limit of sin^2(alpha sqrt y)/y is alpha^2.
double potential_integrand(double alpha, double nu, double y) {
  double q;
  if (y <= 0.0) {
    q = alpha * alpha;
  } else {
    const double s = std::sin(alpha * std::sqrt(y));
    q = s * s / y;
  }
  return std::log((nu + q) / (nu + 1.0));
}

struct SimpsonPanel {
  double a, b, fa, fm, fb, whole;
};

template <class F>
double adaptive_simpson(const F& f, const SimpsonPanel& p, double tol, int depth, bool& ok) {
  const double m = 0.5 * (p.a + p.b);
  const double lm = 0.5 * (p.a + m);
  const double rm = 0.5 * (m + p.b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - p.a) / 6.0 * (p.fa + 4.0 * flm + p.fm);
  const double right = (p.b - m) / 6.0 * (p.fm + 4.0 * frm + p.fb);
  const double delta = left + right - p.whole;
  if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  if (depth <= 0) {
    ok = false;
    return left + right + delta / 15.0;
  }
  return adaptive_simpson(f, {p.a, m, p.fa, flm, p.fm, left}, 0.5 * tol, depth - 1, ok) +
         adaptive_simpson(f, {m, p.b, p.fm, frm, p.fb, right}, 0.5 * tol, depth - 1, ok);
}

}  // namespace

std::vector<double> limit_potential(double alpha, double nu, const std::vector<double>& x_grid,
                                    double abs_tol) {
  if (!(nu > 0.0)) throw std::invalid_argument("limit_potential: nu must be > 0");
  auto f = [&](double y) { return potential_integrand(alpha, nu, y); };
  std::vector<double> v(x_grid.size());
  double prev_x = 0.0;
  double acc = 0.0;
  const double per_panel = abs_tol / static_cast<double>(std::max<std::size_t>(1, x_grid.size()));
  for (std::size_t i = 0; i < x_grid.size(); ++i) {
    const double x = x_grid[i];
    if (x < prev_x) throw std::invalid_argument("limit_potential: x grid must be increasing and >= 0");
    if (x > prev_x) {
      const double fa = f(prev_x), fb = f(x), fm = f(0.5 * (prev_x + x));
      const SimpsonPanel panel{prev_x, x, fa, fm, fb, (x - prev_x) / 6.0 * (fa + 4.0 * fm + fb)};
      bool ok = true;
      acc += adaptive_simpson(f, panel, per_panel, 48, ok);
      if (!ok) {
        std::ostringstream msg;
        msg << "limit_potential: quadrature did not converge at x=" << x;
        throw std::runtime_error(msg.str());
      }
    }
    v[i] = 0.0 - acc;  // +0 at x = 0
    prev_x = x;
  }
  return v;
}

EffectivePotential effective_potential(const MaserParams& params, const StationaryDistribution& ss,
                                       const PotentialOptions& options) {
  EffectivePotential out;
  out.values.resize(ss.dim);
  for (std::size_t n = 0; n < ss.dim; ++n)
    out.values[n] = ss.log_weights[0] - ss.log_weights[n];

  if (options.samples > 0) {
    std::vector<double> xs(options.samples);
    for (std::size_t i = 0; i < options.samples; ++i)
      xs[i] = options.samples == 1
                  ? 0.0
                  : options.x_max * static_cast<double>(i) / static_cast<double>(options.samples - 1);
    const auto vs = limit_potential(params.alpha(), params.nu, xs, options.abs_tol);
    out.limit_samples.reserve(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) out.limit_samples.emplace_back(xs[i], vs[i]);
  }
  return out;
}

std::string to_string(ExtremumKind kind) {
  switch (kind) {
    case ExtremumKind::max: return "max";
    case ExtremumKind::min: return "min";
    case ExtremumKind::degenerate: return "degenerate";
  }
  return "unknown";
}

namespace {

template <class F>
double bisect_root(const F& f, double lo, double hi) {
  double flo = f(lo);
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

std::vector<Intersection> rate_intersections(double alpha, [[maybe_unused]] double nu,
                                             std::optional<double> theta_max) {
  if (!(alpha > 0.0)) throw std::invalid_argument("rate_intersections: alpha must be > 0");
  std::vector<Intersection> out;
  // The death curve theta/alpha dominates everywhere once alpha <= 1.
  if (alpha <= 1.0) return out;

  const double pi = std::numbers::pi;
  const double upper = std::min(theta_max.value_or(3.0 * pi * alpha), alpha);
  constexpr double degenerate_tol = 1e-9;

  // On each arch [k pi, (k+1) pi] the function |sin| - theta/alpha is
  // concave with a single critical point, so it has at most two roots.
  for (int k = 0; k * pi < upper; ++k) {
    const double lo = k * pi;
    const double hi = (k + 1) * pi;
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    auto h = [&](double th) { return sign * std::sin(th) - th / alpha; };
    const double crit = lo + std::acos(1.0 / alpha);
    const double peak = h(crit);
    if (std::abs(peak) <= degenerate_tol && k > 0) {
      if (crit <= upper) out.push_back({crit, ExtremumKind::degenerate});
      continue;
    }
    if (peak < 0.0) continue;
    if (k > 0) {
      const double th = bisect_root(h, lo, crit);
      if (th <= upper) out.push_back({th, ExtremumKind::min});
    }
    const double th = bisect_root(h, crit, hi);
    if (th <= upper) out.push_back({th, ExtremumKind::max});
  }
  return out;
}

std::vector<std::size_t> local_maxima(const std::vector<double>& probs) {
  std::vector<std::size_t> out;
  const std::size_t d = probs.size();
  for (std::size_t n = 0; n < d; ++n) {
    const bool left = n == 0 || probs[n] > probs[n - 1];
    const bool right = n + 1 == d || probs[n] > probs[n + 1];
    if (left && right && probs[n] > 0.0) out.push_back(n);
  }
  return out;
}

std::vector<std::size_t> local_minima(const std::vector<double>& probs) {
  std::vector<std::size_t> out;
  for (std::size_t n = 1; n + 1 < probs.size(); ++n)
    if (probs[n] < probs[n - 1] && probs[n] < probs[n + 1]) out.push_back(n);
  return out;
}

}  // namespace maser
