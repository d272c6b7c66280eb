#include "thinfilm/kernels.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include "thinfilm/error.hpp"
#include "thinfilm/flow.hpp"
#include "thinfilm/spectral.hpp"

namespace thinfilm::kernels {

namespace {

template <bool Parallel, typename Fn> void for_each(std::ptrdiff_t count, Fn &&fn) {
  if constexpr (Parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < count; ++i) fn(i);
  } else {
    for (std::ptrdiff_t i = 0; i < count; ++i) fn(i);
  }
}

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// One axis of the separable log-sum-exp. `cost[i*n + j]` = (x_i - x_j)^2 / eps.
template <bool Parallel>
void logsumexp_axis(const PeriodicGrid &g, int axis, const std::vector<double> &cost, std::span<const double> in,
                    std::span<double> out) {
  const int n = g.points_per_axis();
  std::size_t stride = 1;
  for (int a = axis + 1; a < g.dim(); ++a) stride *= static_cast<std::size_t>(n);
  const std::size_t lines = g.size() / static_cast<std::size_t>(n);
  for_each<Parallel>(static_cast<std::ptrdiff_t>(lines), [&](std::ptrdiff_t line) {
    const std::size_t outer = static_cast<std::size_t>(line) / stride;
    const std::size_t inner = static_cast<std::size_t>(line) % stride;
    const std::size_t base = outer * stride * n + inner;
    for (int j = 0; j < n; ++j) {
      double m = kNegInf;
      for (int i = 0; i < n; ++i) m = std::max(m, in[base + i * stride] - cost[i * n + j]);
      if (m == kNegInf) {
        out[base + j * stride] = kNegInf;
        continue;
      }
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += std::exp(in[base + i * stride] - cost[i * n + j] - m);
      out[base + j * stride] = m + std::log(s);
    }
  });
}

template <bool Parallel>
void separable_impl(const PeriodicGrid &g, std::span<const double> in, double eps, std::span<double> out) {
  require_size(g, in, "separable_logsumexp");
  if (out.size() != g.size()) throw DimensionError("separable_logsumexp: output size");
  if (!(eps > 0.0)) throw DomainError("separable_logsumexp: eps must be positive");
  const int n = g.points_per_axis();
  std::vector<double> cost(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double dx = g.coordinate(i) - g.coordinate(j);
      cost[static_cast<std::size_t>(i) * n + j] = dx * dx / eps;
    }
  std::vector<double> a(in.begin(), in.end()), b(g.size());
  for (int axis = 0; axis < g.dim(); ++axis) {
    logsumexp_axis<Parallel>(g, axis, cost, a, b);
    std::swap(a, b);
  }
  std::copy(a.begin(), a.end(), out.begin());
}

template <bool Parallel> BackwardFlow backward_impl(const PeriodicGrid &g, const VectorFieldSpec &eta, double t) {
  BackwardFlow out;
  out.origin.resize(g.size());
  out.det.assign(g.size(), 1.0);
  out.moved.assign(g.size(), 0);
  for_each<Parallel>(static_cast<std::ptrdiff_t>(g.size()), [&](std::ptrdiff_t i) {
    const Point x = g.node(static_cast<std::size_t>(i));
    out.origin[i] = x;
    if (eta.outside_support(x)) return;
    const FlowState s = flow_with_jacobian(eta, -t, x);
    out.origin[i] = s.x;
    out.det[i] = determinant(s.jacobian, g.dim());
    out.moved[i] = 1;
  });
  return out;
}

double wrap_index(double s, int n) {
  const double r = std::fmod(s, static_cast<double>(n));
  return r < 0.0 ? r + n : r;
}

// 4-point Lagrange weights for nodes j-1, j, j+1, j+2 at fractional offset f in [0, 1).
void cubic_weights(double f, double w[4]) {
  w[0] = -f * (f - 1.0) * (f - 2.0) / 6.0;
  w[1] = (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0;
  w[2] = -(f + 1.0) * f * (f - 2.0) / 2.0;
  w[3] = (f + 1.0) * f * (f - 1.0) / 6.0;
}

double cubic_at(const PeriodicGrid &g, std::span<const double> f, const Point &y) {
  const int d = g.dim();
  const int n = g.points_per_axis();
  int base[kMaxDim];
  double w[kMaxDim][4];
  for (int a = 0; a < d; ++a) {
    const double s = wrap_index((y[a] + 0.5 * g.box_length()) / g.spacing(), n);
    const double fl = std::floor(s);
    base[a] = static_cast<int>(fl);
    cubic_weights(s - fl, w[a]);
  }
  int taps = 1;
  for (int a = 0; a < d; ++a) taps *= 4;
  double acc = 0.0;
  for (int t = 0; t < taps; ++t) {
    int rem = t;
    std::array<int, kMaxDim> idx{};
    double wt = 1.0;
    for (int a = d - 1; a >= 0; --a) {
      const int o = rem % 4;
      rem /= 4;
      idx[a] = ((base[a] + o - 1) % n + n) % n;
      wt *= w[a][o];
    }
    acc += wt * f[g.ravel(idx)];
  }
  return acc;
}

// Per-axis real trigonometric basis at coordinate y: exp(i xi_k (y - x0)) for
// non-Nyquist slots and cos(xi_{n/2} (y - x0)) at the Nyquist slot.
void trig_basis(const PeriodicGrid &g, double y, std::vector<std::complex<double>> &e) {
  const int n = g.points_per_axis();
  e.resize(n);
  const double phase = y + 0.5 * g.box_length();
  for (int k = 0; k < n; ++k) {
    const double arg = g.frequency(k) * phase;
    if (g.is_nyquist(k))
      e[k] = {std::cos(arg), 0.0};
    else
      e[k] = {std::cos(arg), std::sin(arg)};
  }
}

double spectral_at(const PeriodicGrid &g, const std::vector<std::complex<double>> &raw, const Point &y) {
  const int d = g.dim();
  const int n = g.points_per_axis();
  std::vector<std::complex<double>> e[kMaxDim];
  for (int a = 0; a < d; ++a) trig_basis(g, y[a], e[a]);
  std::complex<double> acc{0.0, 0.0};
  if (d == 1) {
    for (int k = 0; k < n; ++k) acc += raw[k] * e[0][k];
  } else if (d == 2) {
    for (int k0 = 0; k0 < n; ++k0) {
      std::complex<double> row{0.0, 0.0};
      for (int k1 = 0; k1 < n; ++k1) row += raw[static_cast<std::size_t>(k0) * n + k1] * e[1][k1];
      acc += row * e[0][k0];
    }
  } else {
    for (std::size_t i = 0; i < raw.size(); ++i) {
      const auto idx = g.unravel(i);
      acc += raw[i] * e[0][idx[0]] * e[1][idx[1]] * e[2][idx[2]];
    }
  }
  return acc.real() / static_cast<double>(g.size());
}

template <bool Parallel>
std::vector<double> interpolate_impl(const PeriodicGrid &g, std::span<const double> f, const std::vector<Point> &where,
                                     const std::vector<unsigned char> &mask, Interpolation kind) {
  require_size(g, f, "interpolate");
  if (where.size() != g.size() || mask.size() != g.size()) throw DimensionError("interpolate: point count");
  std::vector<double> out(f.begin(), f.end());
  std::vector<std::complex<double>> raw;
  if (kind == Interpolation::spectral) {
    // Unnormalized DFT with the corner phase removed, so that
    // f(y) = N^{-1} sum_k raw_k exp(i xi_k (y + L/2)).
    const auto field = forward_transform(f, g);
    raw.assign(field.coeffs().begin(), field.coeffs().end());
    const double w = 1.0 / g.cell_volume();
    for (std::size_t i = 0; i < raw.size(); ++i) {
      const auto idx = g.unravel(i);
      int parity = 0;
      for (int a = 0; a < g.dim(); ++a) parity += idx[a];
      raw[i] *= w * ((parity % 2 == 0) ? 1.0 : -1.0);
    }
  }
  for_each<Parallel>(static_cast<std::ptrdiff_t>(g.size()), [&](std::ptrdiff_t i) {
    if (!mask[i]) return;
    out[i] = (kind == Interpolation::cubic) ? cubic_at(g, f, where[i]) : spectral_at(g, raw, where[i]);
  });
  return out;
}

} // namespace

void separable_logsumexp(const PeriodicGrid &g, std::span<const double> in, double eps, std::span<double> out) {
  separable_impl<true>(g, in, eps, out);
}

BackwardFlow backward_flow(const PeriodicGrid &g, const VectorFieldSpec &eta, double t) {
  return backward_impl<true>(g, eta, t);
}

std::vector<double> interpolate(const PeriodicGrid &g, std::span<const double> f, const std::vector<Point> &where,
                                const std::vector<unsigned char> &mask, Interpolation kind) {
  return interpolate_impl<true>(g, f, where, mask, kind);
}

namespace reference {

void separable_logsumexp(const PeriodicGrid &g, std::span<const double> in, double eps, std::span<double> out) {
  separable_impl<false>(g, in, eps, out);
}

void dense_logsumexp(const PeriodicGrid &g, std::span<const double> in, double eps, std::span<double> out) {
  require_size(g, in, "dense_logsumexp");
  if (out.size() != g.size()) throw DimensionError("dense_logsumexp: output size");
  const int d = g.dim();
  for (std::size_t j = 0; j < g.size(); ++j) {
    const Point y = g.node(j);
    double m = kNegInf;
    std::vector<double> terms(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Point x = g.node(i);
      double c = 0.0;
      for (int a = 0; a < d; ++a) c += (x[a] - y[a]) * (x[a] - y[a]);
      terms[i] = in[i] - c / eps;
      m = std::max(m, terms[i]);
    }
    if (m == kNegInf) {
      out[j] = kNegInf;
      continue;
    }
    double s = 0.0;
    for (double t : terms) s += std::exp(t - m);
    out[j] = m + std::log(s);
  }
}

BackwardFlow backward_flow(const PeriodicGrid &g, const VectorFieldSpec &eta, double t) {
  return backward_impl<false>(g, eta, t);
}

std::vector<double> interpolate(const PeriodicGrid &g, std::span<const double> f, const std::vector<Point> &where,
                                const std::vector<unsigned char> &mask, Interpolation kind) {
  return interpolate_impl<false>(g, f, where, mask, kind);
}

} // namespace reference

} // namespace thinfilm::kernels
