#include "thinfilm/density.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "thinfilm/error.hpp"

namespace thinfilm {

double mass(const PeriodicGrid &g, std::span<const double> f) {
  double s = 0.0;
  for (double v : f) s += v;
  return s * g.cell_volume();
}

double inner_product(const PeriodicGrid &g, std::span<const double> f, std::span<const double> w) {
  require_size(g, f, "inner_product");
  require_size(g, w, "inner_product");
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * w[i];
  return s * g.cell_volume();
}

GridDensity::GridDensity(PeriodicGrid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  require_size(grid_, values_, "GridDensity");
  for (double v : values_) {
    if (!std::isfinite(v)) throw DomainError("GridDensity: non-finite value");
    if (v < 0.0) throw DomainError("GridDensity: negative value");
  }
  const double m = thinfilm::mass(grid_, values_);
  if (std::abs(m - 1.0) > kMassTolerance)
    throw DomainError("GridDensity: mass " + std::to_string(m) + " is not 1");
}

GridDensity GridDensity::normalized(PeriodicGrid grid, std::vector<double> values) {
  require_size(grid, values, "GridDensity::normalized");
  for (double v : values)
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("GridDensity: invalid value");
  const double m = thinfilm::mass(grid, values);
  if (!(m > 0.0)) throw DomainError("GridDensity: profile has zero mass");
  for (double &v : values) v /= m;
  return GridDensity(grid, std::move(values));
}

double GridDensity::mass() const noexcept { return thinfilm::mass(grid_, values_); }

double GridDensity::min_value() const noexcept {
  return *std::min_element(values_.begin(), values_.end());
}

GridDensity gaussian_density(const PeriodicGrid &g, const Point &center, double variance) {
  const MixtureComponent one{1.0, center, variance};
  return gaussian_mixture_density(g, std::span<const MixtureComponent>(&one, 1));
}

GridDensity gaussian_mixture_density(const PeriodicGrid &g, std::span<const MixtureComponent> parts) {
  if (parts.empty()) throw DomainError("gaussian mixture: no components");
  std::vector<double> v(g.size(), 0.0);
  const int d = g.dim();
  for (const auto &c : parts) {
    if (!(c.variance > 0.0)) throw DomainError("gaussian mixture: variance must be positive");
    if (!(c.weight > 0.0)) throw DomainError("gaussian mixture: weight must be positive");
    const double norm = c.weight / std::pow(2.0 * std::numbers::pi * c.variance, 0.5 * d);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Point x = g.node(i);
      double r2 = 0.0;
      for (int a = 0; a < d; ++a) r2 += (x[a] - c.center[a]) * (x[a] - c.center[a]);
      v[i] += norm * std::exp(-0.5 * r2 / c.variance);
    }
  }
  return GridDensity::normalized(g, std::move(v));
}

GridDensity uniform_density(const PeriodicGrid &g) {
  return GridDensity::normalized(g, std::vector<double>(g.size(), 1.0));
}

GridDensity spike_density(const PeriodicGrid &g, const Point &where) {
  std::array<int, kMaxDim> idx{};
  for (int a = 0; a < g.dim(); ++a) {
    const double t = (where[a] + 0.5 * g.box_length()) / g.spacing();
    int j = static_cast<int>(std::lround(t));
    j = ((j % g.points_per_axis()) + g.points_per_axis()) % g.points_per_axis();
    idx[a] = j;
  }
  std::vector<double> v(g.size(), 0.0);
  v[g.ravel(idx)] = 1.0;
  return GridDensity::normalized(g, std::move(v));
}

double second_moment(const GridDensity &u) {
  const auto &g = u.grid();
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += squared_norm(g.node(i), g.dim()) * u[i];
  return s * g.cell_volume();
}

double entropy(const GridDensity &u) {
  double s = 0.0;
  for (double v : u.values())
    if (v > 0.0) s += v * std::log(v);
  return s * u.grid().cell_volume();
}

CarlemanReport carleman_bound(const GridDensity &u) {
  const double d = u.grid().dim();
  const double bound = -1.0 / std::numbers::e - 0.5 * d * std::log(4.0 * std::numbers::pi) -
                       0.25 * second_moment(u);
  return {entropy(u), bound};
}

double boundary_mass(const GridDensity &u) {
  const auto &g = u.grid();
  const double edge = 0.4 * g.box_length();
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const Point x = g.node(i);
    bool outer = false;
    for (int a = 0; a < g.dim(); ++a) outer = outer || std::abs(x[a]) >= edge;
    if (outer) s += u[i];
  }
  return s * g.cell_volume();
}

} // namespace thinfilm
