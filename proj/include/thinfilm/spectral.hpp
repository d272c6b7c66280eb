#pragma once

#include <complex>
#include <span>
#include <vector>

#include "thinfilm/density.hpp"
#include "thinfilm/grid.hpp"

namespace thinfilm {

using Complex = std::complex<double>;

/// Fourier coefficients c(xi) = h^d * sum_x exp(-i x.xi) f(x), stored in FFT slot order.
class SpectralField {
public:
  SpectralField(PeriodicGrid grid, std::vector<Complex> coeffs);

  const PeriodicGrid &grid() const noexcept { return grid_; }
  std::span<const Complex> coeffs() const noexcept { return coeffs_; }
  std::vector<Complex> &mutable_coeffs() noexcept { return coeffs_; }

  /// Coefficient at signed lattice indices k_a in [-n/2, n/2).
  Complex at(const std::array<int, kMaxDim> &modes) const;

  /// c(-xi) = conj(c(xi)) for every non-Nyquist pair, relative to max |c|.
  bool is_conjugate_symmetric(double rel_tol = 1e-12) const;

private:
  PeriodicGrid grid_;
  std::vector<Complex> coeffs_;
};

SpectralField forward_transform(std::span<const double> f, const PeriodicGrid &g);
std::vector<Complex> inverse_transform_complex(const SpectralField &field);
/// Real grid function; throws NumericalFailure when the field is not the
/// transform of a real function (imaginary residue above 1e-12 relative).
GridFunction inverse_transform(const SpectralField &field);

/// inverse(symbol * forward(f)) for a real, even symbol given per FFT slot.
GridFunction apply_symbol(const PeriodicGrid &g, std::span<const double> f,
                          std::span<const double> symbol);

/// |xi|^{2s} per FFT slot (0 at xi = 0 when s > 0, identity when s = 0).
std::vector<double> fractional_symbol(const PeriodicGrid &g, double s);

GridFunction fractional_laplacian(const PeriodicGrid &g, std::span<const double> f, double s);
GridFunction fractional_laplacian(const GridDensity &u, double s);

/// d/dx_axis through the multiplier i*xi_axis; the Nyquist slot is zeroed.
GridFunction partial_derivative(const PeriodicGrid &g, std::span<const double> f, int axis);
std::vector<GridFunction> gradient(const PeriodicGrid &g, std::span<const double> f);
GridFunction divergence(const PeriodicGrid &g, const std::vector<GridFunction> &components);

/// (2 pi)^{-d} (2 pi / L)^d sum_xi m_r(xi) |c(xi)|^2 with m_r = |xi|^{2r}
/// (homogeneous) or (1 + |xi|^2)^r.
double sobolev_norm_sq(const PeriodicGrid &g, std::span<const double> f, double r, bool homogeneous);

/// (1/2) ||u||^2 in the homogeneous H^s seminorm.
double energy(const GridDensity &u, double s);
double energy(const PeriodicGrid &g, std::span<const double> f, double s);

/// Heat flow d_t u = Laplace u via the multiplier exp(-t |xi|^2).
GridFunction heat_semigroup(const PeriodicGrid &g, std::span<const double> f, double t);
/// Density version; values in [-1e-13, 0) after the transform are clamped to 0.
GridDensity heat_semigroup(const GridDensity &u, double t);

struct InterpolationCheck {
  double lhs;
  double rhs;
};
/// (||u||_{r1}, ||u||_{r0}^{1-theta} ||u||_{r2}^theta), homogeneous seminorms.
InterpolationCheck interpolation_check(const PeriodicGrid &g, std::span<const double> f, double r0,
                                       double r1, double r2);

} // namespace thinfilm
