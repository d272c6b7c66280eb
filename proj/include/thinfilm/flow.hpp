#pragma once

#include "thinfilm/density.hpp"
#include "thinfilm/kernels.hpp"
#include "thinfilm/vector_field.hpp"

namespace thinfilm {

struct FlowState {
  Point x;
  Matrix jacobian;
};

/// X_t(x) for dX/dt = eta(X), together with the variational equation
/// d(grad X)/dt = grad eta(X) grad X. Classical RK4 with a fixed step no larger
/// than 1e-3 / max(1, sup|eta|). Requires |t| <= 1.
FlowState flow_with_jacobian(const VectorFieldSpec &eta, double t, const Point &x);
Point flow_map(const VectorFieldSpec &eta, double t, const Point &x);

double determinant(const Matrix &m, int dim) noexcept;

struct PushforwardResult {
  GridDensity density;
  /// 1 / (mass before renormalization).
  double renormalization_factor;
};

/// Density of (X_t)_# u: v(x) = u(X_{-t}(x)) det(grad X_{-t}(x)), then renormalized.
/// Throws NumericalFailure if the mass drifted by more than 1e-3, and DomainError
/// if the support of eta does not fit inside the box.
PushforwardResult pushforward(const GridDensity &u, const VectorFieldSpec &eta, double t,
                              Interpolation kind = Interpolation::cubic);

} // namespace thinfilm
