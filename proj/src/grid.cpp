#include "thinfilm/grid.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "thinfilm/error.hpp"

namespace thinfilm {

PeriodicGrid::PeriodicGrid(int dim, int points_per_axis, double box_length)
    : dim_(dim), n_(points_per_axis), length_(box_length) {
  if (dim < 1 || dim > kMaxDim)
    throw DomainError("PeriodicGrid: dimension must be in [1, " + std::to_string(kMaxDim) + "]");
  if (points_per_axis < 2 || points_per_axis % 2 != 0)
    throw DomainError("PeriodicGrid: points per axis must be a positive even integer");
  if (!(box_length > 0.0) || !std::isfinite(box_length))
    throw DomainError("PeriodicGrid: box length must be positive and finite");

  std::size_t total = 1;
  constexpr auto kMax = std::numeric_limits<std::size_t>::max();
  for (int a = 0; a < dim; ++a) {
    if (total > kMax / static_cast<std::size_t>(points_per_axis))
      throw DomainError("PeriodicGrid: n^d exceeds the addressable range");
    total *= static_cast<std::size_t>(points_per_axis);
  }
  // Keep the node count representable in ptrdiff_t as well, OpenMP loops use signed indices.
  if (total > static_cast<std::size_t>(std::numeric_limits<std::ptrdiff_t>::max() / 16))
    throw DomainError("PeriodicGrid: n^d exceeds the addressable range");
  size_ = total;
  h_ = box_length / points_per_axis;
  cell_volume_ = std::pow(h_, dim);
}

double PeriodicGrid::frequency(int k) const noexcept {
  return 2.0 * std::numbers::pi * signed_mode(k) / length_;
}

std::array<int, kMaxDim> PeriodicGrid::unravel(std::size_t flat) const noexcept {
  std::array<int, kMaxDim> idx{};
  for (int a = dim_ - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(flat % n_);
    flat /= n_;
  }
  return idx;
}

std::size_t PeriodicGrid::ravel(const std::array<int, kMaxDim> &idx) const noexcept {
  std::size_t flat = 0;
  for (int a = 0; a < dim_; ++a) flat = flat * n_ + static_cast<std::size_t>(idx[a]);
  return flat;
}

Point PeriodicGrid::node(std::size_t flat) const noexcept {
  const auto idx = unravel(flat);
  Point p{};
  for (int a = 0; a < dim_; ++a) p[a] = coordinate(idx[a]);
  return p;
}

std::vector<double> PeriodicGrid::squared_frequencies() const {
  std::vector<double> axis(n_);
  for (int k = 0; k < n_; ++k) axis[k] = frequency(k) * frequency(k);
  std::vector<double> out(size_);
  for (std::size_t i = 0; i < size_; ++i) {
    const auto idx = unravel(i);
    double s = 0.0;
    for (int a = 0; a < dim_; ++a) s += axis[idx[a]];
    out[i] = s;
  }
  return out;
}

bool PeriodicGrid::operator==(const PeriodicGrid &other) const noexcept {
  return dim_ == other.dim_ && n_ == other.n_ && length_ == other.length_;
}

void require_same_grid(const PeriodicGrid &a, const PeriodicGrid &b, const char *where) {
  if (!(a == b)) throw DimensionError(std::string(where) + ": grids differ");
}

void require_size(const PeriodicGrid &g, std::span<const double> f, const char *where) {
  if (f.size() != g.size())
    throw DimensionError(std::string(where) + ": expected " + std::to_string(g.size()) +
                         " values, got " + std::to_string(f.size()));
}

double squared_norm(const Point &p, int dim) noexcept {
  double s = 0.0;
  for (int a = 0; a < dim; ++a) s += p[a] * p[a];
  return s;
}

} // namespace thinfilm
