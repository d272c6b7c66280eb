#pragma once

// Closed forms and brute-force evaluations used as independent references.

#include <algorithm>
#include <cstdlib>
#include <cmath>
#include <numbers>
#include <vector>

#include "thinfilm/density.hpp"

namespace oracle {

/// Homogeneous H^s seminorm squared of the unit-variance Gaussian on the line:
/// (1/2pi) int |xi|^{2s} exp(-xi^2) dxi = Gamma(s + 1/2) / (2 pi).
inline double gaussian_hs_sq(double s) { return std::tgamma(s + 0.5) / (2.0 * std::numbers::pi); }

/// Inhomogeneous version by composite Simpson quadrature on [0, 12].
inline double gaussian_inhomogeneous_sq(double r) {
  const int m = 200000;
  const double b = 12.0, h = b / m;
  double acc = 0.0;
  for (int i = 0; i <= m; ++i) {
    const double xi = i * h;
    const double w = (i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    acc += w * std::pow(1.0 + xi * xi, r) * std::exp(-xi * xi);
  }
  return 2.0 * acc * h / 3.0 / (2.0 * std::numbers::pi);
}

/// Periodic-lattice version of the same quantity: the Riemann sum over the
/// frequency lattice with spacing dxi = 2 pi / L. For F(xi) = exp(-xi^2) the
/// generalized Euler-Maclaurin expansion for |xi|^{2s} F(xi) gives
///   sum - integral = 2 sum_j zeta(-2s-2j) dxi^{2s+2j+1} F^{(2j)}(0) / (2j)!,
/// with F^{(2j)}(0) = (-1)^j (2j)! / j!. Only odd negative zeta arguments occur
/// for half-integer s; every term vanishes for integer s.
inline double gaussian_hs_sq_lattice(double s, double box_length) {
  const double dxi = 2.0 * std::numbers::pi / box_length;
  const double twice_s = 2.0 * s;
  if (std::abs(twice_s - std::round(twice_s)) > 1e-12) return std::nan("");
  // zeta(-1), zeta(-3), ..., zeta(-21).
  const double zeta_odd[] = {-1.0 / 12.0,      1.0 / 120.0,      -1.0 / 252.0,       1.0 / 240.0,
                             -1.0 / 132.0,     691.0 / 32760.0,  -1.0 / 12.0,        3617.0 / 8160.0,
                             -43867.0 / 14364.0, 174611.0 / 6600.0, -77683.0 / 276.0};
  constexpr int terms = 11;
  double correction = 0.0;
  const int k2 = static_cast<int>(std::lround(twice_s));
  if (k2 % 2 == 1) {
    double j_fact = 1.0;
    for (int j = 0; j < terms; ++j) {
      if (j > 0) j_fact *= j;
      const int arg = k2 + 2 * j; // zeta(-arg), arg odd
      const int idx = (arg - 1) / 2;
      if (idx >= terms) break;
      const double derivative_over_fact = (j % 2 ? -1.0 : 1.0) / j_fact;
      correction += 2.0 * zeta_odd[idx] * std::pow(dxi, twice_s + 2.0 * j + 1.0) * derivative_over_fact;
    }
  }
  return gaussian_hs_sq(s) + correction / (2.0 * std::numbers::pi);
}

/// Exact W^2 between piecewise-constant cell densities on the line.
///
/// Independently of the library's sweep: merge the breakpoints of both CDFs in
/// probability, then on each probability segment both quantiles are affine,
/// so Simpson's rule integrates |Q_u - Q_v|^2 exactly.
class CellQuantile {
public:
  explicit CellQuantile(const thinfilm::GridDensity &u) : g_(u.grid()), cdf_(u.size() + 1, 0.0), m_(u.size()) {
    const double h = g_.spacing();
    for (std::size_t j = 0; j < u.size(); ++j) {
      m_[j] = u[j] * h;
      cdf_[j + 1] = cdf_[j] + m_[j];
    }
  }
  const std::vector<double> &cdf() const { return cdf_; }
  /// Cell j with cdf[j] <= p < cdf[j + 1].
  std::size_t cell(double p) const {
    const auto it = std::upper_bound(cdf_.begin() + 1, cdf_.end(), p);
    return std::min(static_cast<std::size_t>(it - cdf_.begin()) - 1, m_.size() - 1);
  }
  /// Affine quantile of cell j evaluated at p.
  double affine(std::size_t j, double p) const {
    const double h = g_.spacing();
    return g_.coordinate(static_cast<int>(j)) - 0.5 * h + h * (p - cdf_[j]) / (cdf_[j + 1] - cdf_[j]);
  }

private:
  thinfilm::PeriodicGrid g_;
  std::vector<double> cdf_;
  std::vector<double> m_;
};

inline double quantile_w2(const thinfilm::GridDensity &u, const thinfilm::GridDensity &v) {
  const CellQuantile qu(u), qv(v);
  std::vector<double> cuts(qu.cdf());
  cuts.insert(cuts.end(), qv.cdf().begin(), qv.cdf().end());
  // Totals differ from one by rounding; integrate up to the smaller one.
  const double top = std::min(qu.cdf().back(), qv.cdf().back());
  for (auto &c : cuts) c = std::clamp(c, 0.0, top);
  std::sort(cuts.begin(), cuts.end());
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double p0 = cuts[i], p1 = cuts[i + 1];
    if (!(p1 > p0)) continue;
    const double pm = 0.5 * (p0 + p1);
    // No cut lies strictly inside (p0, p1), so the cells holding p0 cover the segment.
    const std::size_t ju = qu.cell(p0), jv = qv.cell(p0);
    auto d = [&](double p) { return qu.affine(ju, p) - qv.affine(jv, p); };
    const double a = d(p0), m = d(pm), b = d(p1);
    acc += (p1 - p0) * (a * a + 4.0 * m * m + b * b) / 6.0;
  }
  return acc;
}

} // namespace oracle
