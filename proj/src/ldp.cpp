#include "maser/ldp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace maser {

std::pair<double, double> MemoizedScgf::operator()(double s) const {
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(s); it != cache_.end()) return it->second;
  }
  const std::pair<double, double> value =
      source_.both ? source_.both(s) : std::pair{source_.lambda(s), source_.dlambda(s)};
  std::lock_guard lock(mutex_);
  cache_[s] = value;
  return value;
}

std::size_t MemoizedScgf::size() const {
  std::lock_guard lock(mutex_);
  return cache_.size();
}

Scgf maser_scgf(const MaserParams& params, const SpectralOptions& options) {
  // One eigensolve serves both callbacks when they are asked for the same s.
  auto eval = [params, options](double s) {
    const SpectralResult r = spectral_bound(params, s, options);
    if (!r.converged) {
      std::ostringstream msg;
      msg << "lambda(s) did not converge at s=" << s;
      throw std::runtime_error(msg.str());
    }
    return r;
  };
  return Scgf{[eval](double s) { return eval(s).lambda; },
              [eval](double s) { return eval(s).dlambda; },
              [eval](double s) {
                const SpectralResult r = eval(s);
                return std::pair{r.lambda, r.dlambda};
              }};
}

namespace {

RatePoint solve_point(const MemoizedScgf& scgf, double x, const RateFunctionOptions& opt,
                      double dl_lo, double dl_hi) {
  RatePoint pt;
  pt.x = x;
  if (!(x > dl_lo && x < dl_hi)) {
    pt.attainable = false;
    pt.I = std::numeric_limits<double>::quiet_NaN();
    pt.s_star = x <= dl_lo ? -opt.s_max : opt.s_max;
    return pt;
  }
  double lo = -opt.s_max;
  double hi = opt.s_max;
  while (hi - lo > opt.s_tol) {
    const double mid = 0.5 * (lo + hi);
    if (scgf(mid).second < x)
      lo = mid;
    else
      hi = mid;
  }
  pt.s_star = 0.5 * (lo + hi);
  pt.I = pt.s_star * x - scgf(pt.s_star).first;
  return pt;
}

}  // namespace

RateFunctionTable rate_function(const Scgf& source, const std::vector<double>& x_grid,
                                const RateFunctionOptions& options) {
  if (!(options.s_max > 0.0)) throw std::invalid_argument("rate_function: s_max must be > 0");
  MemoizedScgf scgf(source);

  RateFunctionTable table;
  table.m = scgf(0.0).second;
  const double h = 1e-4;
  table.V = (scgf(h).second - scgf(-h).second) / (2.0 * h);

  const double dl_lo = scgf(-options.s_max).second;
  const double dl_hi = scgf(options.s_max).second;

  table.points.resize(x_grid.size());
  const unsigned threads = std::max(1u, std::min<unsigned>(options.threads,
                                                           static_cast<unsigned>(x_grid.size())));
  if (threads <= 1) {
    for (std::size_t i = 0; i < x_grid.size(); ++i)
      table.points[i] = solve_point(scgf, x_grid[i], options, dl_lo, dl_hi);
    return table;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < x_grid.size(); i += threads)
          table.points[i] = solve_point(scgf, x_grid[i], options, dl_lo, dl_hi);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return table;
}

RateFunctionTable rate_function(const MaserParams& params, const std::vector<double>& x_grid,
                                const RateFunctionOptions& options,
                                const SpectralOptions& spectral) {
  RateFunctionTable table = rate_function(maser_scgf(params, spectral), x_grid, options);
  const auto [m, V] = clt_params(params, spectral);
  table.m = m;
  table.V = V;
  return table;
}

std::pair<double, double> clt_params(const MaserParams& params, const SpectralOptions& options) {
  const CumulantEstimates c = cumulants(params, 2, options);
  return {c.m, c.V};
}

}  // namespace maser
