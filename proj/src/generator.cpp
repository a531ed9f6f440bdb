#include "maser/generator.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "maser/model.hpp"

namespace maser {

std::vector<double> TiltedGenerator::scale() const {
  std::vector<double> g(log_scale.size());
  for (std::size_t n = 0; n < g.size(); ++n) g[n] = std::exp(log_scale[n]);
  return g;
}

TiltedGenerator build_tilted(const MaserParams& params, double s, std::size_t dim) {
  if (dim < 2) throw std::invalid_argument("build_tilted: dim must be >= 2");
  if (!std::isfinite(s)) throw std::invalid_argument("build_tilted: s must be finite");
  const RateTable r = rates(params, dim);
  const double tilt = std::exp(s);

  TiltedGenerator g;
  g.s = s;
  g.dim = dim;
  g.counted = r.counted;
  g.birth = r.birth;
  g.death = r.death;
  g.diag.resize(dim);
  g.sub.resize(dim - 1);
  g.sup.resize(dim - 1);
  g.sym_off.resize(dim - 1);
  for (std::size_t n = 0; n < dim; ++n) g.diag[n] = -(r.birth[n] + r.death[n]);

  bool positive = true;
  for (std::size_t n = 0; n + 1 < dim; ++n) {
    g.sub[n] = tilt * r.counted[n] + params.nu * (static_cast<double>(n) + 1.0);
    g.sup[n] = r.death[n + 1];
    g.sym_off[n] = std::sqrt(g.sub[n] * g.sup[n]);
    positive = positive && g.sub[n] > 0.0 && g.sup[n] > 0.0;
  }
  if (positive) {
    g.log_scale.resize(dim);
    g.log_scale[0] = 0.0;
    for (std::size_t n = 0; n + 1 < dim; ++n)
      g.log_scale[n + 1] = g.log_scale[n] + 0.5 * (std::log(g.sup[n]) - std::log(g.sub[n]));
  }
  return g;
}

SymmetricTridiagonal symmetrize(const TiltedGenerator& gen) {
  for (std::size_t n = 0; n + 1 < gen.dim; ++n) {
    if (!(gen.sub[n] > 0.0) || !(gen.sup[n] > 0.0))
      throw std::domain_error("symmetrize: off-diagonal entry at level " + std::to_string(n) +
                              " is not strictly positive");
  }
  return SymmetricTridiagonal{gen.diag, gen.sym_off, gen.log_scale};
}

std::vector<double> apply(const TiltedGenerator& gen, std::span<const double> x) {
  std::vector<double> y(gen.dim);
  for (std::size_t n = 0; n < gen.dim; ++n) {
    double acc = gen.diag[n] * x[n];
    if (n > 0) acc += gen.sub[n - 1] * x[n - 1];
    if (n + 1 < gen.dim) acc += gen.sup[n] * x[n + 1];
    y[n] = acc;
  }
  return y;
}

std::vector<double> apply_transpose(const TiltedGenerator& gen, std::span<const double> x) {
  std::vector<double> y(gen.dim);
  for (std::size_t n = 0; n < gen.dim; ++n) {
    double acc = gen.diag[n] * x[n];
    if (n + 1 < gen.dim) acc += gen.sub[n] * x[n + 1];
    if (n > 0) acc += gen.sup[n - 1] * x[n - 1];
    y[n] = acc;
  }
  return y;
}

DiscreteTiltedTransfer build_discrete(const MaserParams& params, double s, std::size_t dim) {
  if (dim < 2) throw std::invalid_argument("build_discrete: dim must be >= 2");
  params.validate();
  DiscreteTiltedTransfer t;
  t.s = s;
  t.dim = dim;
  t.up.resize(dim);
  t.stay.resize(dim);
  const double tilt = std::exp(s);
  for (std::size_t n = 0; n < dim; ++n) {
    const double angle = params.phi * std::sqrt(static_cast<double>(n) + 1.0);
    const double sn = std::sin(angle);
    const double cn = std::cos(angle);
    t.up[n] = tilt * sn * sn;
    t.stay[n] = cn * cn;
  }
  return t;
}

std::vector<double> step(const DiscreteTiltedTransfer& transfer, std::span<const double> p) {
  std::vector<double> out(transfer.dim, 0.0);
  for (std::size_t n = 0; n < transfer.dim; ++n) {
    out[n] += transfer.stay[n] * p[n];
    if (n + 1 < transfer.dim) out[n + 1] += transfer.up[n] * p[n];
  }
  return out;
}

double discrete_mgf(const DiscreteTiltedTransfer& transfer, std::size_t steps,
                    std::size_t initial) {
  if (initial >= transfer.dim) throw std::invalid_argument("discrete_mgf: initial level out of range");
  std::vector<double> p(transfer.dim, 0.0);
  p[initial] = 1.0;
  for (std::size_t k = 0; k < steps; ++k) p = step(transfer, p);
  return std::accumulate(p.begin(), p.end(), 0.0);
}

}  // namespace maser
