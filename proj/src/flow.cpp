#include "thinfilm/flow.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "thinfilm/error.hpp"

namespace thinfilm {

namespace {

struct Derivative {
  Point dx;
  Matrix dj;
};

Derivative rhs(const VectorFieldSpec &eta, const FlowState &s) {
  const int d = eta.dim;
  Derivative out{eta.value(s.x), {}};
  const Matrix g = eta.jacobian(s.x);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      double v = 0.0;
      for (int k = 0; k < d; ++k) v += g[i][k] * s.jacobian[k][j];
      out.dj[i][j] = v;
    }
  return out;
}

FlowState advance(const FlowState &s, const Derivative &k, double dt, int d) {
  FlowState out = s;
  for (int i = 0; i < d; ++i) {
    out.x[i] += dt * k.dx[i];
    for (int j = 0; j < d; ++j) out.jacobian[i][j] += dt * k.dj[i][j];
  }
  return out;
}

FlowState identity_state(const Point &x, int d) {
  FlowState s{x, {}};
  for (int i = 0; i < d; ++i) s.jacobian[i][i] = 1.0;
  return s;
}

} // namespace

FlowState flow_with_jacobian(const VectorFieldSpec &eta, double t, const Point &x) {
  if (!(std::abs(t) <= 1.0)) throw DomainError("flow_map: |t| must be <= 1");
  const int d = eta.dim;
  FlowState s = identity_state(x, d);
  if (t == 0.0 || eta.outside_support(x)) return s;
  const double max_step = 1e-3 / std::max(1.0, eta.sup_value);
  const long steps = std::max(1L, static_cast<long>(std::ceil(std::abs(t) / max_step - 1e-9)));
  const double dt = t / static_cast<double>(steps);
  for (long n = 0; n < steps; ++n) {
    const Derivative k1 = rhs(eta, s);
    const Derivative k2 = rhs(eta, advance(s, k1, 0.5 * dt, d));
    const Derivative k3 = rhs(eta, advance(s, k2, 0.5 * dt, d));
    const Derivative k4 = rhs(eta, advance(s, k3, dt, d));
    for (int i = 0; i < d; ++i) {
      s.x[i] += dt / 6.0 * (k1.dx[i] + 2.0 * k2.dx[i] + 2.0 * k3.dx[i] + k4.dx[i]);
      for (int j = 0; j < d; ++j)
        s.jacobian[i][j] += dt / 6.0 * (k1.dj[i][j] + 2.0 * k2.dj[i][j] + 2.0 * k3.dj[i][j] + k4.dj[i][j]);
    }
  }
  return s;
}

Point flow_map(const VectorFieldSpec &eta, double t, const Point &x) { return flow_with_jacobian(eta, t, x).x; }

double determinant(const Matrix &m, int dim) noexcept {
  switch (dim) {
  case 1:
    return m[0][0];
  case 2:
    return m[0][0] * m[1][1] - m[0][1] * m[1][0];
  default:
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  }
}

PushforwardResult pushforward(const GridDensity &u, const VectorFieldSpec &eta, double t, Interpolation kind) {
  const auto &g = u.grid();
  if (eta.dim != g.dim()) throw DimensionError("pushforward: field and grid dimensions differ");
  if (!(std::abs(t) <= 1.0)) throw DomainError("pushforward: |t| must be <= 1");
  if (t == 0.0 || eta.support_radius <= 0.0) return {u, 1.0};
  for (int a = 0; a < g.dim(); ++a)
    if (std::abs(eta.center[a]) + eta.support_radius >= 0.5 * g.box_length() - g.spacing())
      throw DomainError("pushforward: field support wraps the periodic boundary");

  const auto flow = kernels::backward_flow(g, eta, t);
  auto values = kernels::interpolate(g, u.values(), flow.origin, flow.moved, kind);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!flow.moved[i]) continue;
    values[i] = std::max(0.0, values[i]) * flow.det[i];
    if (!(values[i] >= 0.0)) throw NumericalFailure("pushforward: flow Jacobian lost orientation");
  }
  const double m = mass(g, values);
  if (!(std::abs(m - 1.0) <= 1e-3))
    throw NumericalFailure("pushforward: mass drift " + std::to_string(m - 1.0) + " exceeds 1e-3");
  for (double &v : values) v /= m;
  return {GridDensity(g, std::move(values)), 1.0 / m};
}

} // namespace thinfilm
