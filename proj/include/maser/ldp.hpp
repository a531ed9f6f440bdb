#pragma once

#include <functional>
#include <map>
#include <mutex>
#include <utility>
#include <vector>

#include "maser/params.hpp"
#include "maser/spectral.hpp"

namespace maser {

/// A scaled cumulant generating function lambda(s) together with its
/// derivative. Both must be smooth, lambda convex.
struct Scgf {
  std::function<double(double)> lambda;
  std::function<double(double)> dlambda;
  /// Optional joint evaluation (lambda, dlambda), used when set.
  std::function<std::pair<double, double>(double)> both;
};

/// Thread-safe memo of (lambda, dlambda) per field value. Entries are
/// deterministic, so concurrent inserts of the same key are harmless.
class MemoizedScgf {
 public:
  explicit MemoizedScgf(Scgf source) : source_(std::move(source)) {}

  std::pair<double, double> operator()(double s) const;
  [[nodiscard]] std::size_t size() const;

 private:
  Scgf source_;
  mutable std::mutex mutex_;
  mutable std::map<double, std::pair<double, double>> cache_;
};

/// lambda(s) of the maser from `spectral_bound`; throws std::runtime_error
/// at a field value where the truncation does not converge.
Scgf maser_scgf(const MaserParams& params, const SpectralOptions& options = {});

struct RatePoint {
  double x = 0.0;
  double I = 0.0;       // rate function value (NaN when unattainable)
  double s_star = 0.0;  // maximizing field
  bool attainable = true;
};

struct RateFunctionTable {
  std::vector<RatePoint> points;
  double m = 0.0;
  double V = 0.0;
};

struct RateFunctionOptions {
  double s_max = 2.0;
  double s_tol = 1e-10;
  unsigned threads = 1;
};

/// I(x) = sup_s [s x - lambda(s)], evaluated by solving lambda'(s) = x with
/// bisection on [-s_max, s_max]. Points outside (lambda'(-s_max),
/// lambda'(s_max)) are marked unattainable rather than failing the table.
RateFunctionTable rate_function(const Scgf& scgf, const std::vector<double>& x_grid,
                                const RateFunctionOptions& options = {});

RateFunctionTable rate_function(const MaserParams& params, const std::vector<double>& x_grid,
                                const RateFunctionOptions& options = {},
                                const SpectralOptions& spectral = {});

/// Central-limit parameters (m, V) = (lambda'(0), lambda''(0)).
std::pair<double, double> clt_params(const MaserParams& params,
                                     const SpectralOptions& options = {});

}  // namespace maser
