#include "thinfilm/vector_field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "thinfilm/error.hpp"

namespace thinfilm {

namespace {

// Below this distance to an endpoint exp(-1/t) underflows to exactly 0.
constexpr double kEdge = 2e-3;

struct StepDerivs {
  double psi = 0.0, d1 = 0.0, d2 = 0.0;
};

// psi(t) = f(t) / (f(t) + f(1 - t)), f(t) = exp(-1/t)
StepDerivs smooth_step(double t) {
  if (t <= kEdge) return {0.0, 0.0, 0.0};
  if (t >= 1.0 - kEdge) return {1.0, 0.0, 0.0};
  const double s = 1.0 - t;
  const double a = std::exp(-1.0 / t);
  const double b = std::exp(-1.0 / s);
  const double a1 = a / (t * t);
  const double b1 = -b / (s * s);
  const double a2 = a * (1.0 / (t * t * t * t) - 2.0 / (t * t * t));
  const double b2 = b * (1.0 / (s * s * s * s) - 2.0 / (s * s * s));
  const double sum = a + b;
  const double num = a1 * b - a * b1;
  const double num1 = a2 * b - a * b2;
  StepDerivs out;
  out.psi = a / sum;
  out.d1 = num / (sum * sum);
  out.d2 = num1 / (sum * sum) - 2.0 * num * (a1 + b1) / (sum * sum * sum);
  return out;
}

double radius(const Point &y, int dim) { return std::sqrt(squared_norm(y, dim)); }

Point offset(const Point &x, const Point &c, int dim) {
  Point y{};
  for (int a = 0; a < dim; ++a) y[a] = x[a] - c[a];
  return y;
}

} // namespace

SmoothCutoff::SmoothCutoff(double inner, double outer) : inner_(inner), outer_(outer) {
  if (!(inner >= 0.0 && outer > inner)) throw DomainError("SmoothCutoff: need 0 <= inner < outer");
}

double SmoothCutoff::value(double r) const noexcept {
  return 1.0 - smooth_step((r - inner_) / (outer_ - inner_)).psi;
}

double SmoothCutoff::d1(double r) const noexcept {
  const double w = outer_ - inner_;
  return -smooth_step((r - inner_) / w).d1 / w;
}

double SmoothCutoff::d2(double r) const noexcept {
  const double w = outer_ - inner_;
  return -smooth_step((r - inner_) / w).d2 / (w * w);
}

CutoffQuadratic::CutoffQuadratic(int dim, double amplitude, double constant, Point linear, double quadratic,
                                 Point center, SmoothCutoff cutoff)
    : dim_(dim), amplitude_(amplitude), constant_(constant), linear_(linear), quadratic_(quadratic),
      center_(center), cutoff_(cutoff) {
  if (dim < 1 || dim > kMaxDim) throw DomainError("CutoffQuadratic: bad dimension");
}

double CutoffQuadratic::value(const Point &x) const noexcept {
  const Point y = offset(x, center_, dim_);
  const double r = radius(y, dim_);
  if (r >= cutoff_.outer()) return 0.0;
  double p = constant_ + quadratic_ * r * r;
  for (int a = 0; a < dim_; ++a) p += linear_[a] * y[a];
  return amplitude_ * p * cutoff_.value(r);
}

Point CutoffQuadratic::gradient(const Point &x) const noexcept {
  Point out{};
  const Point y = offset(x, center_, dim_);
  const double r = radius(y, dim_);
  if (r >= cutoff_.outer()) return out;
  double p = constant_ + quadratic_ * r * r;
  for (int a = 0; a < dim_; ++a) p += linear_[a] * y[a];
  const double chi = cutoff_.value(r);
  const double chi1 = (r > cutoff_.inner()) ? cutoff_.d1(r) : 0.0;
  for (int a = 0; a < dim_; ++a) {
    const double dp = linear_[a] + 2.0 * quadratic_ * y[a];
    const double dchi = (chi1 != 0.0) ? chi1 * y[a] / r : 0.0;
    out[a] = amplitude_ * (dp * chi + p * dchi);
  }
  return out;
}

Matrix CutoffQuadratic::hessian(const Point &x) const noexcept {
  Matrix h{};
  const Point y = offset(x, center_, dim_);
  const double r = radius(y, dim_);
  if (r >= cutoff_.outer()) return h;
  double p = constant_ + quadratic_ * r * r;
  for (int a = 0; a < dim_; ++a) p += linear_[a] * y[a];
  const double chi = cutoff_.value(r);
  const bool ramp = r > cutoff_.inner();
  const double chi1 = ramp ? cutoff_.d1(r) : 0.0;
  const double chi2 = ramp ? cutoff_.d2(r) : 0.0;
  Point dp{}, dchi{};
  for (int a = 0; a < dim_; ++a) {
    dp[a] = linear_[a] + 2.0 * quadratic_ * y[a];
    dchi[a] = ramp ? chi1 * y[a] / r : 0.0;
  }
  for (int i = 0; i < dim_; ++i) {
    for (int j = 0; j < dim_; ++j) {
      const double delta = (i == j) ? 1.0 : 0.0;
      double d2chi = 0.0;
      if (ramp) {
        const double yy = y[i] * y[j] / (r * r);
        d2chi = chi2 * yy + chi1 * (delta - yy) / r;
      }
      h[i][j] = amplitude_ * (2.0 * quadratic_ * delta * chi + dp[i] * dchi[j] + dchi[i] * dp[j] + p * d2chi);
    }
  }
  return h;
}

bool VectorFieldSpec::outside_support(const Point &x) const noexcept {
  double r2 = 0.0;
  for (int a = 0; a < dim; ++a) r2 += (x[a] - center[a]) * (x[a] - center[a]);
  return r2 >= support_radius * support_radius;
}

VectorFieldSpec zero_field(int dim) {
  VectorFieldSpec eta;
  eta.dim = dim;
  eta.value = [](const Point &) { return Point{}; };
  eta.jacobian = [](const Point &) { return Matrix{}; };
  eta.support_radius = 0.0;
  return eta;
}

VectorFieldSpec plateau_field(int dim, Point direction, SmoothCutoff cutoff, Point center) {
  VectorFieldSpec eta;
  eta.dim = dim;
  eta.center = center;
  eta.support_radius = cutoff.outer();
  eta.value = [=](const Point &x) {
    const double chi = cutoff.value(radius(offset(x, center, dim), dim));
    Point v{};
    for (int a = 0; a < dim; ++a) v[a] = direction[a] * chi;
    return v;
  };
  eta.jacobian = [=](const Point &x) {
    const Point y = offset(x, center, dim);
    const double r = radius(y, dim);
    Matrix j{};
    if (r <= cutoff.inner() || r >= cutoff.outer()) return j;
    const double c1 = cutoff.d1(r);
    for (int i = 0; i < dim; ++i)
      for (int k = 0; k < dim; ++k) j[i][k] = direction[i] * c1 * y[k] / r;
    return j;
  };
  estimate_sup_norms(eta);
  return eta;
}

VectorFieldSpec linear_plateau_field(int dim, Matrix m, SmoothCutoff cutoff, Point center) {
  VectorFieldSpec eta;
  eta.dim = dim;
  eta.center = center;
  eta.support_radius = cutoff.outer();
  eta.value = [=](const Point &x) {
    const Point y = offset(x, center, dim);
    const double chi = cutoff.value(radius(y, dim));
    Point v{};
    for (int i = 0; i < dim; ++i) {
      double s = 0.0;
      for (int k = 0; k < dim; ++k) s += m[i][k] * y[k];
      v[i] = s * chi;
    }
    return v;
  };
  eta.jacobian = [=](const Point &x) {
    const Point y = offset(x, center, dim);
    const double r = radius(y, dim);
    const double chi = cutoff.value(r);
    const bool ramp = r > cutoff.inner() && r < cutoff.outer();
    const double c1 = ramp ? cutoff.d1(r) : 0.0;
    Matrix j{};
    for (int i = 0; i < dim; ++i) {
      double my = 0.0;
      for (int k = 0; k < dim; ++k) my += m[i][k] * y[k];
      for (int k = 0; k < dim; ++k) j[i][k] = m[i][k] * chi + (ramp ? my * c1 * y[k] / r : 0.0);
    }
    return j;
  };
  estimate_sup_norms(eta);
  return eta;
}

VectorFieldSpec gradient_field(const CutoffQuadratic &g, double sign) {
  VectorFieldSpec eta;
  eta.dim = g.dim();
  eta.center = g.center();
  eta.support_radius = g.support_radius();
  eta.value = [g, sign](const Point &x) {
    Point v = g.gradient(x);
    for (auto &c : v) c *= sign;
    return v;
  };
  eta.jacobian = [g, sign](const Point &x) {
    Matrix h = g.hessian(x);
    for (auto &row : h)
      for (auto &c : row) c *= sign;
    return h;
  };
  estimate_sup_norms(eta);
  return eta;
}

double frobenius(const Matrix &m, int dim) noexcept {
  double s = 0.0;
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) s += m[i][j] * m[i][j];
  return std::sqrt(s);
}

void estimate_sup_norms(VectorFieldSpec &eta, int samples) {
  const double r = eta.support_radius;
  if (r <= 0.0) {
    eta.sup_value = eta.sup_jacobian = eta.sup_hessian = 0.0;
    return;
  }
  const int d = eta.dim;
  const int per_axis = (d == 1) ? samples : std::max(21, static_cast<int>(std::pow(samples, 1.0 / d) * 4));
  std::size_t total = 1;
  for (int a = 0; a < d; ++a) total *= static_cast<std::size_t>(per_axis);
  const double step = 2.0 * r / (per_axis - 1);
  const double fd = 1e-5 * r;
  double sv = 0.0, sj = 0.0, sh = 0.0;
  for (std::size_t flat = 0; flat < total; ++flat) {
    Point x{};
    std::size_t rem = flat;
    for (int a = d - 1; a >= 0; --a) {
      x[a] = eta.center[a] - r + step * static_cast<double>(rem % per_axis);
      rem /= per_axis;
    }
    sv = std::max(sv, std::sqrt(squared_norm(eta.value(x), d)));
    sj = std::max(sj, frobenius(eta.jacobian(x), d));
    for (int k = 0; k < d; ++k) {
      Point xp = x, xm = x;
      xp[k] += fd;
      xm[k] -= fd;
      const Matrix jp = eta.jacobian(xp), jm = eta.jacobian(xm);
      Matrix diff{};
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) diff[i][j] = (jp[i][j] - jm[i][j]) / (2.0 * fd);
      sh = std::max(sh, frobenius(diff, d));
    }
  }
  eta.sup_value = sv;
  eta.sup_jacobian = sj;
  eta.sup_hessian = sh;
}

void validate_support(const VectorFieldSpec &eta) {
  if (eta.support_radius <= 0.0) return;
  const int d = eta.dim;
  const double r = eta.support_radius * (1.0 + 1e-9);
  const int dirs = (d == 1) ? 2 : 64;
  for (int k = 0; k < dirs; ++k) {
    Point x = eta.center;
    if (d == 1) {
      x[0] += (k == 0 ? r : -r);
    } else {
      const double th = 2.0 * std::numbers::pi * k / dirs;
      x[0] += r * std::cos(th);
      x[1] += r * std::sin(th);
    }
    if (squared_norm(eta.value(x), d) != 0.0) throw DomainError("vector field is nonzero outside its declared support");
  }
}

} // namespace thinfilm
