#include "maser/validation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <iomanip>
#include <sstream>
#include <thread>

#include "maser/generator.hpp"
#include "maser/ldp.hpp"
#include "maser/model.hpp"
#include "maser/spectral.hpp"
#include "maser/trajectories.hpp"

namespace maser {

namespace {

constexpr double kNu = 0.15;

std::string sci(double x, int digits = 3) {
  std::ostringstream os;
  os << std::scientific << std::setprecision(digits) << x;
  return os.str();
}

std::string fix(double x, int digits = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << x;
  return os.str();
}

double rel_diff(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

// 1
CriterionResult conservation() {
  CriterionResult r{1, "lambda(0) = 0", false, "", 0.0, {}};
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  bool all_converged = true;
  for (double nex : {10.0, 50.0, 150.0}) {
    for (double alpha : {0.5, 1.0, 3.0, 6.6, 12.0}) {
      const SpectralResult sr = spectral_bound(MaserParams::from_alpha(nex, alpha, kNu), 0.0);
      all_converged = all_converged && sr.converged;
      worst = std::max(worst, std::abs(sr.lambda));
    }
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.passed = all_converged && worst <= 1e-10 && secs < 10.0;
  r.detail = "max |lambda(0)| = " + sci(worst) + " over 15 points (tol 1e-10), " + fix(secs, 2) +
             " s (limit 10 s)";
  return r;
}

// 2
CriterionResult mean_rate_identity() {
  CriterionResult r{2, "mean-rate identity", false, "", 0.0, {}};
  double worst = 0.0;
  for (double nex : {10.0, 50.0, 150.0}) {
    for (double alpha : {0.5, 1.0, 3.0, 6.6, 12.0}) {
      const MaserParams p = MaserParams::from_alpha(nex, alpha, kNu);
      const double hf = lambda_derivative(p, 0.0);
      const StationaryDistribution ss = stationary(p);
      const MeanCountRate mc = mean_count_rate(p, ss, 1.0);
      worst = std::max({worst, rel_diff(hf, mc.from_counts), rel_diff(hf, mc.from_mean),
                        rel_diff(mc.from_counts, mc.from_mean)});
    }
  }
  r.passed = worst <= 1e-8;
  r.detail = "max relative spread of {lambda'(0), nex sum pi sin^2, <n> - nu} = " + sci(worst) +
             " (tol 1e-8)";

  const MaserParams p = MaserParams::from_alpha(150.0, 6.6, kNu);
  const StationaryDistribution ss = stationary(p);
  const MeanCountRate mc = mean_count_rate(p, ss, 1.0);
  const double literal = p.nex * (ss.mean - p.nu);
  r.notes.push_back("info (not counted): at nex=150, alpha=6.6 the form nex(<n> - nu) = " +
                    fix(literal, 6) + " vs nex sum pi sin^2 = " + fix(mc.from_counts, 6) +
                    " (ratio " + fix(literal / mc.from_counts, 6) +
                    "); the count rate equals <n> - nu without the nex factor");
  return r;
}

// 3
CriterionResult duality() {
  CriterionResult r{3, "Perron vector = stationary law", false, "", 0.0, {}};
  const MaserParams p = MaserParams::from_alpha(150.0, 6.6, kNu);
  const SpectralResult sr = spectral_bound(p, 0.0);
  const StationaryDistribution ss = stationary_truncated(p, sr.dim_used);
  double worst = 0.0;
  std::size_t compared = 0;
  bool positive = true;
  for (std::size_t n = 0; n < sr.dim_used; ++n) {
    positive = positive && sr.right_vec[n] > 0.0 && sr.left_vec[n] > 0.0;
    if (ss.probs[n] <= 1e-300) continue;
    worst = std::max(worst, std::abs(sr.right_vec[n] - ss.probs[n]));
    ++compared;
  }
  r.passed = sr.converged && positive && worst <= 1e-8;
  r.detail = "max |r_n - pi_n| = " + sci(worst) + " over " + std::to_string(compared) +
             " levels (dim " + std::to_string(sr.dim_used) + ", tol 1e-8)" +
             (positive ? ", vectors positive" : ", NON-POSITIVE vector entry");
  return r;
}

// 4
CriterionResult bistability() {
  CriterionResult r{4, "bistability window", false, "", 0.0, {}};
  const auto at66 = local_maxima(stationary(MaserParams::from_alpha(150.0, 6.6, kNu)).probs);
  const auto at3 = local_maxima(stationary(MaserParams::from_alpha(150.0, 3.0, kNu)).probs);
  r.passed = at66.size() == 2 && at3.size() == 1;
  std::ostringstream os;
  os << "local maxima: " << at66.size() << " at alpha=6.6 (want 2), " << at3.size()
     << " at alpha=3 (want 1); peaks at n =";
  for (auto n : at66) os << ' ' << n;
  os << " |";
  for (auto n : at3) os << ' ' << n;
  r.detail = os.str();
  return r;
}

// 5
CriterionResult intersections() {
  CriterionResult r{5, "rate intersection counts", false, "", 0.0, {}};
  const std::vector<std::pair<double, std::size_t>> want{
      {0.5, 0}, {3.0, 1}, {4.5, 1}, {4.7, 3}, {6.66, 3}, {7.7, 3}, {7.9, 5}};
  bool ok = true;
  std::ostringstream os;
  for (const auto& [alpha, count] : want) {
    const auto roots = rate_intersections(alpha, kNu);
    ok = ok && roots.size() == count;
    os << "alpha=" << alpha << ":" << roots.size() << "/" << count << ' ';
  }
  const auto roots = rate_intersections(6.66, kNu);
  const bool kinds = roots.size() == 3 && roots[0].kind == ExtremumKind::max &&
                     roots[1].kind == ExtremumKind::min && roots[2].kind == ExtremumKind::max;
  const auto one = rate_intersections(3.0, kNu);
  const bool single = one.size() == 1 && one[0].kind == ExtremumKind::max;
  r.passed = ok && kinds && single;
  r.detail = os.str() + (kinds ? "kinds at 6.66 (max,min,max)" : "WRONG kinds at 6.66");
  return r;
}

// 6
CriterionResult gap_grid(unsigned threads) {
  CriterionResult r{6, "gap positive on 41x41 grid", false, "", 0.0, {}};
  constexpr int kSteps = 41;
  const std::size_t total = kSteps * kSteps;
  std::vector<double> gaps(total, 0.0);
  std::vector<char> conv(total, 0);
  std::vector<std::exception_ptr> errors(std::max(1u, threads));
  auto work = [&](unsigned t, unsigned stride) {
    try {
      for (std::size_t i = t; i < total; i += stride) {
        const double alpha = 0.5 + 7.5 * static_cast<double>(i / kSteps) / (kSteps - 1);
        const double s = -1.0 + 2.0 * static_cast<double>(i % kSteps) / (kSteps - 1);
        const SpectralResult sr = spectral_bound(MaserParams::from_alpha(50.0, alpha, kNu), s);
        gaps[i] = sr.gap;
        conv[i] = sr.converged ? 1 : 0;
      }
    } catch (...) {
      errors[t] = std::current_exception();
    }
  };
  const unsigned n_threads = std::max(1u, threads);
  if (n_threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(work, t, n_threads);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  const auto it = std::min_element(gaps.begin(), gaps.end());
  const std::size_t at = static_cast<std::size_t>(it - gaps.begin());
  const bool all_conv = std::all_of(conv.begin(), conv.end(), [](char c) { return c != 0; });
  r.passed = all_conv && *it > 0.0;
  r.detail = "min gap " + sci(*it) + " at alpha=" +
             fix(0.5 + 7.5 * static_cast<double>(at / kSteps) / (kSteps - 1), 4) +
             ", s=" + fix(-1.0 + 2.0 * static_cast<double>(at % kSteps) / (kSteps - 1), 3) +
             (all_conv ? ", all converged" : ", NOT all converged");
  return r;
}

// 7
CriterionResult sharpening() {
  CriterionResult r{7, "cross-over sharpens with nex", false, "", 0.0, {}};
  std::vector<double> peaks;
  std::ostringstream os;
  os << "max lambda'' at alpha=6.6:";
  for (double nex : {50.0, 75.0, 100.0}) {
    const Crossover c = crossover(MaserParams::from_alpha(nex, 6.6, kNu));
    peaks.push_back(c.max_curvature);
    os << " nex=" << nex << ": " << sci(c.max_curvature) << " (s=" << sci(c.s_at_max, 2) << ")";
  }
  r.passed = peaks[0] < peaks[1] && peaks[1] < peaks[2];
  r.detail = os.str();
  return r;
}

// 8
CriterionResult gap_closing() {
  CriterionResult r{8, "gap closes at the transition", false, "", 0.0, {}};
  const double g3 = spectral_gap(MaserParams::from_alpha(150.0, 3.0, kNu), 0.0);
  const double g66 = spectral_gap(MaserParams::from_alpha(150.0, 6.6, kNu), 0.0);
  r.passed = g3 >= 100.0 * g66 && g66 > 0.0;
  r.detail = "g(0) = " + sci(g3, 6) + " at alpha=3, " + sci(g66, 6) + " at alpha=6.6, ratio " +
             sci(g3 / g66) + " (want >= 100)";
  return r;
}

// 9
CriterionResult mgf_oracle(unsigned threads) {
  CriterionResult r{9, "Monte Carlo MGF vs matrix exponential", false, "", 0.0, {}};
  const MaserParams p = MaserParams::from_alpha(10.0, 2.0, kNu);
  const std::vector<double> s_list{-0.5, 0.5};
  const EnsembleStats st = ensemble(p, 0, 1.0, 100000, s_list, 9001, {threads, 0});
  bool ok = true;
  std::ostringstream os;
  for (const auto& est : st.mgf_estimates) {
    const MgfResult exact = mgf_exact(p, est.s, 1.0, 0, 120, MgfMethod::both);
    const double z = (est.estimate - exact.value) / est.standard_error;
    ok = ok && std::abs(z) <= 3.0;
    os << "s=" << est.s << ": MC " << fix(est.estimate, 6) << " +- " << sci(est.standard_error, 2)
       << " vs exact " << fix(exact.value, 6) << " (z=" << fix(z, 2) << ") ";
    r.notes.push_back("s=" + fix(est.s, 1) + ": uniformization " + sci(exact.uniformization, 15) +
                      ", Taylor " + sci(exact.taylor, 15) + ", leak " + sci(exact.leak, 2));
  }
  r.passed = ok && st.aborted == 0;
  r.detail = os.str() + "(within 3 SE)";
  return r;
}

// Exhaustive sum over ground/excited outcome words.
double enumerate_words(const MaserParams& p, double s, int steps, std::size_t dim) {
  double total = 0.0;
  for (unsigned word = 0; word < (1u << steps); ++word) {
    std::size_t n = 0;
    double prob = 1.0;
    int grounds = 0;
    for (int k = 0; k < steps; ++k) {
      const double g = std::pow(std::sin(p.phi * std::sqrt(static_cast<double>(n) + 1.0)), 2);
      if (word & (1u << k)) {
        prob *= g;
        ++grounds;
        ++n;
      } else {
        prob *= 1.0 - g;
      }
    }
    if (n < dim) total += prob * std::exp(s * grounds);
  }
  return total;
}

// 10
CriterionResult discrete_oracle() {
  CriterionResult r{10, "discrete transfer vs enumeration", false, "", 0.0, {}};
  double worst = 0.0;
  for (double phi : {0.3, 0.632455532033676, 1.1}) {
    const MaserParams p{10.0, phi, kNu};
    for (double s : {-1.0, -0.3, 0.0, 0.5, 1.2}) {
      const double transfer = discrete_mgf(build_discrete(p, s, 5), 3, 0);
      worst = std::max(worst, std::abs(transfer - enumerate_words(p, s, 3, 5)));
    }
  }
  r.passed = worst <= 1e-12;
  r.detail = "max |transfer - enumeration| = " + sci(worst) + " over 15 (phi, s) cases (tol 1e-12)";
  return r;
}

// 11
CriterionResult clt(unsigned threads) {
  CriterionResult r{11, "central limit theorem", false, "", 0.0, {}};
  const MaserParams p = MaserParams::from_alpha(10.0, 2.0, kNu);
  const auto [m, V] = clt_params(p);
  const double t = 200.0;
  const EnsembleStats st = ensemble(p, 0, t, 10000, {}, 424242, {threads, 0});
  const double norm = std::sqrt(V * t);
  std::vector<double> z;
  z.reserve(st.counts.size());
  for (auto c : st.counts) z.push_back((static_cast<double>(c) - m * t) / norm);
  const double n = static_cast<double>(z.size());
  double mean = 0.0;
  for (double v : z) mean += v;
  mean /= n;
  double m2 = 0.0, m3 = 0.0;
  for (double v : z) {
    const double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  const double var = m2 / (n - 1.0);
  const double skew = (m3 / n) / std::pow(m2 / n, 1.5);
  r.passed = std::abs(skew) < 0.1 && var >= 0.95 && var <= 1.05;
  r.detail = "m=" + fix(m, 6) + " V=" + fix(V, 6) + ": skewness " + fix(skew, 4) +
             " (|.| < 0.1), variance " + fix(var, 4) + " (in [0.95, 1.05]), mean " + fix(mean, 4);
  return r;
}

Scgf fixed_dim_scgf(const MaserParams& p, std::size_t dim) {
  auto eval = [p, dim](double s) { return spectral_at_dim(p, s, dim); };
  return Scgf{[eval](double s) { return eval(s).lambda; },
              [eval](double s) { return eval(s).dlambda; },
              [eval](double s) {
                const SpectralResult sr = eval(s);
                return std::pair{sr.lambda, sr.dlambda};
              }};
}

// sup_s (s x - lambda(s)) on [lo, hi]; the objective is concave.
double golden_conjugate(const std::function<double(double)>& lambda, double x, double lo,
                        double hi) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  auto f = [&](double s) { return s * x - lambda(s); };
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 200 && b - a > 1e-12; ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return std::max({fc, fd, f(lo), f(hi)});
}

// 12
CriterionResult legendre(unsigned threads) {
  CriterionResult r{12, "Legendre-Fenchel duality", false, "", 0.0, {}};
  constexpr double kSMax = 2.0;
  bool ok = true;
  std::ostringstream os;
  for (const auto& [nex, alpha] : {std::pair{10.0, 2.0}, std::pair{50.0, 6.6}}) {
    const MaserParams p = MaserParams::from_alpha(nex, alpha, kNu);
    const SpectralResult edge = spectral_bound(p, kSMax);
    const std::size_t dim = edge.dim_used;
    const Scgf scgf = fixed_dim_scgf(p, dim);

    const double x_lo = scgf.dlambda(-1.5);
    const double x_hi = scgf.dlambda(1.5);
    std::vector<double> xs;
    for (int i = 0; i <= 40; ++i) xs.push_back(x_lo + (x_hi - x_lo) * i / 40.0);
    RateFunctionOptions opt;
    opt.s_max = kSMax;
    opt.threads = threads;
    const RateFunctionTable table = rate_function(scgf, xs, opt);

    double fy = 0.0;
    double min_i = 0.0;
    bool attainable = true;
    for (const auto& pt : table.points) {
      attainable = attainable && pt.attainable;
      if (!pt.attainable) continue;
      fy = std::max(fy, std::abs(pt.I - golden_conjugate(scgf.lambda, pt.x, -kSMax, kSMax)));
      min_i = std::min(min_i, pt.I);
    }
    const RateFunctionTable at_m = rate_function(scgf, {table.m}, opt);
    const double i_m = std::abs(at_m.points[0].I);

    double lam_dd = 0.0;
    const double hs = 0.05;
    std::vector<double> lam;
    for (int i = 0; i <= 80; ++i) lam.push_back(scgf.lambda(-kSMax + hs * i));
    for (std::size_t i = 1; i + 1 < lam.size(); ++i)
      lam_dd = std::min(lam_dd, (lam[i + 1] - 2.0 * lam[i] + lam[i - 1]) / (hs * hs));

    double i_dd = 0.0;
    const double hx = xs[1] - xs[0];
    for (std::size_t i = 1; i + 1 < table.points.size(); ++i)
      i_dd = std::min(i_dd, (table.points[i + 1].I - 2.0 * table.points[i].I +
                             table.points[i - 1].I) /
                                (hx * hx));

    const bool here = edge.converged && attainable && fy <= 1e-8 && i_m <= 1e-8 &&
                      lam_dd >= -1e-9 && i_dd >= -1e-9 && min_i >= -1e-12;
    ok = ok && here;
    os << "[nex=" << nex << " alpha=" << alpha << " dim " << dim << "] FY " << sci(fy, 2)
       << ", I(m) " << sci(i_m, 2) << ", min dd lambda " << sci(lam_dd, 2) << ", min dd I "
       << sci(i_dd, 2) << "; ";
  }
  r.passed = ok;
  r.detail = os.str() + "tol 1e-8 / 1e-8 / -1e-9 / -1e-9";
  return r;
}

// U(x nex)/nex by linear interpolation between levels.
double rescaled_potential(const std::vector<double>& log_weights, double nex, double x) {
  const double pos = x * nex;
  const auto n = static_cast<std::size_t>(std::floor(pos));
  if (n + 1 >= log_weights.size()) return -log_weights.back() / nex;
  const double frac = pos - static_cast<double>(n);
  return -((1.0 - frac) * log_weights[n] + frac * log_weights[n + 1]) / nex;
}

// 13
CriterionResult potential_limit() {
  CriterionResult r{13, "potential converges to its limit", false, "", 0.0, {}};
  constexpr double kXMax = 1.2;
  std::vector<double> xs;
  for (int i = 0; i <= 120; ++i) xs.push_back(kXMax * i / 120.0);
  bool ok = true;
  std::ostringstream os;
  for (double alpha : {3.0, 6.6}) {
    const std::vector<double> v = limit_potential(alpha, kNu, xs);
    std::vector<double> errs;
    for (double nex : {50.0, 100.0, 200.0}) {
      const MaserParams p = MaserParams::from_alpha(nex, alpha, kNu);
      const auto dim = static_cast<std::size_t>(std::ceil(kXMax * nex)) + 2;
      const StationaryDistribution ss = stationary_truncated(p, dim);
      double err = 0.0;
      for (std::size_t i = 0; i < xs.size(); ++i)
        err = std::max(err, std::abs(rescaled_potential(ss.log_weights, nex, xs[i]) - v[i]));
      errs.push_back(err);
    }
    ok = ok && errs[0] > errs[1] && errs[1] > errs[2];
    os << "alpha=" << alpha << " sup error " << sci(errs[0]) << " > " << sci(errs[1]) << " > "
       << sci(errs[2]) << "; ";
  }
  r.passed = ok;
  r.detail = os.str() + "nex = 50, 100, 200";
  return r;
}

CriterionResult dispatch(int id, unsigned threads) {
  switch (id) {
    case 1: return conservation();
    case 2: return mean_rate_identity();
    case 3: return duality();
    case 4: return bistability();
    case 5: return intersections();
    case 6: return gap_grid(threads);
    case 7: return sharpening();
    case 8: return gap_closing();
    case 9: return mgf_oracle(threads);
    case 10: return discrete_oracle();
    case 11: return clt(threads);
    case 12: return legendre(threads);
    case 13: return potential_limit();
    default: throw std::invalid_argument("no acceptance criterion " + std::to_string(id));
  }
}

}  // namespace

CriterionResult run_criterion(int id, const ValidationOptions& options) {
  if (id < 1 || id > kCriterionCount)
    throw std::invalid_argument("no acceptance criterion " + std::to_string(id));
  const auto t0 = std::chrono::steady_clock::now();
  CriterionResult r;
  try {
    r = dispatch(id, options.threads);
  } catch (const std::exception& e) {
    r = CriterionResult{id, "criterion " + std::to_string(id), false,
                        std::string("error: ") + e.what(), 0.0, {}};
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

std::vector<CriterionResult> run_acceptance(const ValidationOptions& options) {
  std::vector<int> ids = options.only;
  if (ids.empty())
    for (int i = 1; i <= kCriterionCount; ++i) ids.push_back(i);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  std::vector<CriterionResult> out;
  for (int id : ids) out.push_back(run_criterion(id, options));
  return out;
}

std::string format_result(const CriterionResult& result) {
  std::ostringstream os;
  os << (result.passed ? "PASS" : "FAIL") << "  " << std::setw(2) << result.id << "  "
     << result.name << ": " << result.detail << "  (" << fix(result.seconds, 2) << " s)";
  for (const auto& note : result.notes) os << "\n        " << note;
  return os.str();
}

}  // namespace maser
