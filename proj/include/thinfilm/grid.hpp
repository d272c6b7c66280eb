#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace thinfilm {

constexpr int kMaxDim = 3;

using Point = std::array<double, kMaxDim>;
using GridFunction = std::vector<double>;

/// Uniform periodic grid on the box [-L/2, L/2)^d with n nodes per axis.
///
/// Node j on an axis sits at x_j = -L/2 + j*h, so x = 0 is always a node.
/// Flat storage is row-major (last axis fastest). The discrete frequency on
/// an axis for FFT index k is xi = 2*pi*k/L with k folded into [-n/2, n/2).
class PeriodicGrid {
public:
  PeriodicGrid(int dim, int points_per_axis, double box_length);

  int dim() const noexcept { return dim_; }
  int points_per_axis() const noexcept { return n_; }
  double box_length() const noexcept { return length_; }
  double spacing() const noexcept { return h_; }
  std::size_t size() const noexcept { return size_; }
  /// h^d, the quadrature weight of one node.
  double cell_volume() const noexcept { return cell_volume_; }

  double coordinate(int j) const noexcept { return -0.5 * length_ + j * h_; }
  /// Signed integer frequency index in [-n/2, n/2) for FFT slot k.
  int signed_mode(int k) const noexcept { return k < n_ / 2 ? k : k - n_; }
  double frequency(int k) const noexcept;
  bool is_nyquist(int k) const noexcept { return k == n_ / 2; }

  /// Per-axis indices of flat index `flat`.
  std::array<int, kMaxDim> unravel(std::size_t flat) const noexcept;
  std::size_t ravel(const std::array<int, kMaxDim> &idx) const noexcept;
  Point node(std::size_t flat) const noexcept;

  /// |xi|^2 for every flat FFT slot.
  std::vector<double> squared_frequencies() const;

  bool operator==(const PeriodicGrid &other) const noexcept;

private:
  int dim_;
  int n_;
  double length_;
  double h_;
  double cell_volume_;
  std::size_t size_;
};

void require_same_grid(const PeriodicGrid &a, const PeriodicGrid &b, const char *where);
void require_size(const PeriodicGrid &g, std::span<const double> f, const char *where);

double squared_norm(const Point &p, int dim) noexcept;

} // namespace thinfilm
