#pragma once

#include <span>
#include <utility>
#include <vector>

#include "thinfilm/grid.hpp"

namespace thinfilm {

/// Nonnegative grid function with unit mass h^d * sum(values) = 1.
///
/// The constructor rejects negative or non-finite values and a mass defect
/// above 1e-12; use `normalized` to build one from an unnormalized profile.
class GridDensity {
public:
  static constexpr double kMassTolerance = 1e-12;

  GridDensity(PeriodicGrid grid, std::vector<double> values);

  /// Scales `values` to unit mass. Throws DomainError if the mass is not positive.
  static GridDensity normalized(PeriodicGrid grid, std::vector<double> values);

  const PeriodicGrid &grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  const std::vector<double> &vector() const noexcept { return values_; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  std::size_t size() const noexcept { return values_.size(); }

  double mass() const noexcept;
  double min_value() const noexcept;

  bool operator==(const GridDensity &other) const noexcept {
    return grid_ == other.grid_ && values_ == other.values_;
  }

private:
  PeriodicGrid grid_;
  std::vector<double> values_;
};

double mass(const PeriodicGrid &g, std::span<const double> f);

/// Isotropic Gaussian N(center, variance * I) sampled at the nodes, normalized on the grid.
GridDensity gaussian_density(const PeriodicGrid &g, const Point &center, double variance);

struct MixtureComponent {
  double weight;
  Point center;
  double variance;

  bool operator==(const MixtureComponent &) const = default;
};
GridDensity gaussian_mixture_density(const PeriodicGrid &g, std::span<const MixtureComponent> parts);
GridDensity uniform_density(const PeriodicGrid &g);
/// Whole mass in the single cell containing `where`.
GridDensity spike_density(const PeriodicGrid &g, const Point &where);

double second_moment(const GridDensity &u);
/// Integral of u log u with the convention 0 log 0 = 0.
double entropy(const GridDensity &u);

struct CarlemanReport {
  double entropy_value;
  double lower_bound;
};
/// Entropy together with -1/e - (d/2) log(4 pi) - (1/4) * second moment.
CarlemanReport carleman_bound(const GridDensity &u);

/// Mass in the outer shell |x_a| >= 0.4 L on any axis (10% of the box width per side).
double boundary_mass(const GridDensity &u);

/// h^d * sum f*g.
double inner_product(const PeriodicGrid &g, std::span<const double> f, std::span<const double> w);

} // namespace thinfilm
