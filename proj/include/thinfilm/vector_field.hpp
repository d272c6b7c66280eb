#pragma once

#include <array>
#include <functional>

#include "thinfilm/grid.hpp"

namespace thinfilm {

using Matrix = std::array<std::array<double, kMaxDim>, kMaxDim>;

/// C-infinity step: 1 for r <= inner, 0 for r >= outer, built from exp(-1/t).
class SmoothCutoff {
public:
  SmoothCutoff(double inner, double outer);
  double inner() const noexcept { return inner_; }
  double outer() const noexcept { return outer_; }
  double value(double r) const noexcept;
  double d1(double r) const noexcept;
  double d2(double r) const noexcept;

private:
  double inner_;
  double outer_;
};

/// Compactly supported scalar profile
///   g(x) = A * (c0 + b.(x - x0) + q |x - x0|^2) * cutoff(|x - x0|)
/// with closed-form gradient and Hessian.
class CutoffQuadratic {
public:
  CutoffQuadratic(int dim, double amplitude, double constant, Point linear, double quadratic,
                  Point center, SmoothCutoff cutoff);

  int dim() const noexcept { return dim_; }
  const Point &center() const noexcept { return center_; }
  double support_radius() const noexcept { return cutoff_.outer(); }
  double value(const Point &x) const noexcept;
  Point gradient(const Point &x) const noexcept;
  Matrix hessian(const Point &x) const noexcept;

private:
  int dim_;
  double amplitude_;
  double constant_;
  Point linear_;
  double quadratic_;
  Point center_;
  SmoothCutoff cutoff_;
};

/// Smooth compactly supported vector field with analytic Jacobian
/// (jacobian[i][j] = d eta_i / d x_j). eta vanishes for |x - center| >= support_radius.
struct VectorFieldSpec {
  int dim = 1;
  std::function<Point(const Point &)> value;
  std::function<Matrix(const Point &)> jacobian;
  Point center{};
  double support_radius = 0.0;
  double sup_value = 0.0;
  double sup_jacobian = 0.0;
  double sup_hessian = 0.0;

  bool outside_support(const Point &x) const noexcept;
};

VectorFieldSpec zero_field(int dim);
/// eta = direction * cutoff(|x - center|).
VectorFieldSpec plateau_field(int dim, Point direction, SmoothCutoff cutoff, Point center = {});
/// eta = M (x - center) * cutoff(|x - center|).
VectorFieldSpec linear_plateau_field(int dim, Matrix m, SmoothCutoff cutoff, Point center = {});
/// eta = sign * grad g.
VectorFieldSpec gradient_field(const CutoffQuadratic &g, double sign);

/// Fills sup_value / sup_jacobian by sampling a box of side 2R around the
/// center with `samples` points per axis (sup_hessian is left untouched).
void estimate_sup_norms(VectorFieldSpec &eta, int samples = 401);

/// Spot-checks eta == 0 just outside the declared radius; throws DomainError otherwise.
void validate_support(const VectorFieldSpec &eta);

/// Frobenius norm of a d x d block.
double frobenius(const Matrix &m, int dim) noexcept;

} // namespace thinfilm
