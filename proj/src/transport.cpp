#include "thinfilm/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "thinfilm/error.hpp"
#include "thinfilm/kernels.hpp"

namespace thinfilm {

std::string to_string(TransportMethod m) { return m == TransportMethod::exact_1d ? "exact_1d" : "sinkhorn"; }

namespace {

// --- exact 1D -------------------------------------------------------------

std::vector<double> cell_masses(const GridDensity &u) {
  std::vector<double> m(u.values().begin(), u.values().end());
  const double total = std::accumulate(m.begin(), m.end(), 0.0);
  for (double &x : m) x /= total;
  return m;
}

struct HalfSweep {
  double w2 = 0.0;
  std::vector<double> cell_integral; // integral of psi over each processed u cell
  double psi_end = 0.0;
};

// Transports the first `count` u cells onto v, both listed in sweep order and
// positioned by arc length s from the starting box edge (cell c spans
// [c h, (c+1) h]). psi(0) = 0 and dpsi/ds = s - S_T(s), which equals the
// Kantorovich potential phi up to a constant in either sweep direction.
// Mass is tracked per cell (consumed amounts), never as a global cumulative
// sum, so tail cells with tiny masses keep their relative precision.
HalfSweep half_sweep(const std::vector<double> &mu, const std::vector<double> &mv, std::size_t count, double h) {
  HalfSweep out;
  out.cell_integral.assign(count, 0.0);
  const std::size_t n = mv.size();
  std::size_t j = 0;
  double used_v = 0.0; // mass already taken from v cell j
  double psi = 0.0;

  // Fraction of v cell j already used; 1 once exhausted (left-continuous quantile).
  auto used_fraction = [&]() { return (j < n && mv[j] > 0.0) ? std::min(1.0, used_v / mv[j]) : 0.0; };
  // Displacement s - S_T at the start of a piece, from integer cell offsets and
  // in-cell fractions, so that positions of size L never cancel.
  auto displacement = [&](std::size_t c, double frac_u, double frac_v) {
    return (static_cast<double>(c) - static_cast<double>(j)) * h + h * (frac_u - frac_v);
  };
  // Accumulate one piece of length ds starting at displacement d0, on which
  // S_T advances with slope k.
  auto piece = [&](std::size_t c, double d0, double ds, double k, double density) {
    const double slope = 1.0 - k;
    out.w2 += density * (d0 * d0 * ds + d0 * slope * ds * ds + slope * slope * ds * ds * ds / 3.0);
    out.cell_integral[c] += psi * ds + d0 * ds * ds / 2.0 + slope * ds * ds * ds / 6.0;
    psi += d0 * ds + slope * ds * ds / 2.0;
  };

  for (std::size_t c = 0; c < count; ++c) {
    const double m = mu[c];
    if (m <= 0.0) {
      // Flat CDF: T stays at the left-continuous quantile.
      piece(c, displacement(c, 0.0, used_fraction()), h, 0.0, 0.0);
      continue;
    }
    const double density = m / h;
    double used_u = 0.0;
    while (used_u < m) {
      while (j < n && used_v >= mv[j]) {
        ++j;
        used_v = 0.0;
      }
      const double frac_u = used_u / m;
      if (j >= n) {
        // Rounding left a sliver of u mass beyond the end of v.
        piece(c, displacement(c, frac_u, 0.0), h * (1.0 - frac_u), 0.0, density);
        break;
      }
      const double remaining = m - used_u;
      const double avail = mv[j] - used_v;
      const double d0 = displacement(c, frac_u, used_v / mv[j]);
      const double k = m / mv[j];
      if (remaining <= avail) {
        piece(c, d0, h * (1.0 - frac_u), k, density);
        used_v += remaining;
        used_u = m;
      } else {
        piece(c, d0, h * (avail / m), k, density);
        used_u += avail;
        used_v = mv[j];
      }
    }
  }
  out.psi_end = psi;
  return out;
}

} // namespace

TransportResult w2_exact_1d(const GridDensity &u, const GridDensity &v) {
  if (u.grid().dim() != 1 || v.grid().dim() != 1) throw DomainError("w2_exact_1d: dimension must be 1");
  require_same_grid(u.grid(), v.grid(), "w2_exact_1d");
  const std::size_t n = u.size();
  const double h = u.grid().spacing();
  const auto mu = cell_masses(u);
  const auto mv = cell_masses(v);

  // Sweep from both box edges and meet where the u-CDF crosses 1/2, so that
  // rounding in the bulk never perturbs how either tail is matched.
  std::size_t split = 0;
  double acc = 0.0;
  while (split < n && acc + mu[split] <= 0.5) acc += mu[split++];
  split = std::clamp<std::size_t>(split, 1, n - 1);

  // Each sweep sees the full v; it stops once its own share of u is placed,
  // so the two meet inside whichever v cell holds the median.
  std::vector<double> mu_right(n - split), mv_right(mv.rbegin(), mv.rend());
  for (std::size_t c = 0; c < n - split; ++c) mu_right[c] = mu[n - 1 - c];

  const HalfSweep left = half_sweep(mu, mv, split, h);
  const HalfSweep right = half_sweep(mu_right, mv_right, n - split, h);

  TransportResult res;
  res.method = TransportMethod::exact_1d;
  res.w2_squared = left.w2 + right.w2;
  res.potential.assign(n, 0.0);
  const double shift = left.psi_end - right.psi_end;
  for (std::size_t i = 0; i < split; ++i) res.potential[i] = left.cell_integral[i] / h;
  for (std::size_t c = 0; c < n - split; ++c) res.potential[n - 1 - c] = right.cell_integral[c] / h + shift;
  const double mean = std::accumulate(res.potential.begin(), res.potential.end(), 0.0) / static_cast<double>(n);
  for (double &p : res.potential) p -= mean;
  res.marginal_error = 0.0;
  return res;
}

// --- Sinkhorn -------------------------------------------------------------

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<double> log_weights(const GridDensity &u) {
  const auto m = cell_masses(u);
  std::vector<double> out(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) out[i] = (m[i] > 0.0) ? std::log(m[i]) : kNegInf;
  return out;
}

// c-transform: out(y) = -eps log sum_x w(x) exp((pot(x) - |x-y|^2) / eps)
void soft_c_transform(const PeriodicGrid &g, const std::vector<double> &logw, const std::vector<double> &pot,
                      double eps, std::vector<double> &out) {
  std::vector<double> in(g.size());
  for (std::size_t i = 0; i < in.size(); ++i) in[i] = logw[i] + pot[i] / eps;
  out.resize(g.size());
  kernels::separable_logsumexp(g, in, eps, out);
  for (double &v : out) v *= -eps;
}

double weighted_sum(const std::vector<double> &logw, const std::vector<double> &f) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (logw[i] != kNegInf) s += std::exp(logw[i]) * f[i];
  return s;
}

double marginal_defect(const std::vector<double> &logw, const std::vector<double> &cur, const std::vector<double> &next,
                       double eps) {
  double err = 0.0;
  for (std::size_t i = 0; i < cur.size(); ++i)
    if (logw[i] != kNegInf) err += std::exp(logw[i]) * std::abs(1.0 - std::exp((cur[i] - next[i]) / eps));
  return err;
}

struct PairSolve {
  double value;
  int iterations;
  double error;
};

PairSolve solve_pair(const PeriodicGrid &g, const std::vector<double> &la, const std::vector<double> &lb,
                     std::vector<double> &f, std::vector<double> &gpot, const SinkhornOptions &opt) {
  std::vector<double> next;
  double err = std::numeric_limits<double>::infinity();
  int it = 0;
  for (; it < opt.max_iter; ++it) {
    soft_c_transform(g, la, f, opt.epsilon, next);
    err = marginal_defect(lb, gpot, next, opt.epsilon);
    gpot.swap(next);
    soft_c_transform(g, lb, gpot, opt.epsilon, f);
    if (err <= opt.tol) break;
  }
  if (err > opt.tol) throw ConvergenceError("w2_sinkhorn: marginals did not converge", err, it);
  return {weighted_sum(la, f) + weighted_sum(lb, gpot), it + 1, err};
}

PairSolve solve_self(const PeriodicGrid &g, const std::vector<double> &la, std::vector<double> &p,
                     const SinkhornOptions &opt) {
  std::vector<double> next;
  double err = std::numeric_limits<double>::infinity();
  int it = 0;
  for (; it < opt.max_iter; ++it) {
    soft_c_transform(g, la, p, opt.epsilon, next);
    err = marginal_defect(la, p, next, opt.epsilon);
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = 0.5 * (p[i] + next[i]);
    if (err <= opt.tol) break;
  }
  if (err > opt.tol) throw ConvergenceError("w2_sinkhorn: symmetric potential did not converge", err, it);
  return {2.0 * weighted_sum(la, p), it + 1, err};
}

} // namespace

TransportResult w2_sinkhorn(const GridDensity &u, const GridDensity &v, const SinkhornOptions &opt,
                            SinkhornWarmStart *warm) {
  require_same_grid(u.grid(), v.grid(), "w2_sinkhorn");
  if (!(opt.epsilon > 0.0)) throw DomainError("w2_sinkhorn: epsilon must be positive");
  if (opt.max_iter < 1 || !(opt.tol > 0.0)) throw DomainError("w2_sinkhorn: bad iteration settings");
  const auto &g = u.grid();
  const auto la = log_weights(u);
  const auto lb = log_weights(v);

  SinkhornWarmStart local;
  SinkhornWarmStart &st = warm ? *warm : local;
  auto ready = [&](std::vector<double> &x) {
    if (x.size() != g.size()) x.assign(g.size(), 0.0);
  };
  ready(st.f);
  ready(st.g);
  ready(st.self_u);
  ready(st.self_v);

  const PairSolve uv = solve_pair(g, la, lb, st.f, st.g, opt);
  const PairSolve uu = solve_self(g, la, st.self_u, opt);
  const PairSolve vv = solve_self(g, lb, st.self_v, opt);

  TransportResult res;
  res.method = TransportMethod::sinkhorn;
  res.sinkhorn_epsilon = opt.epsilon;
  res.iterations = uv.iterations + uu.iterations + vv.iterations;
  res.marginal_error = std::max({uv.error, uu.error, vv.error});
  res.w2_squared = std::max(0.0, uv.value - 0.5 * uu.value - 0.5 * vv.value);
  res.potential.resize(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) res.potential[i] = 0.5 * (st.f[i] - st.self_u[i]);
  const double mean = std::accumulate(res.potential.begin(), res.potential.end(), 0.0) / static_cast<double>(g.size());
  for (double &p : res.potential) p -= mean;
  return res;
}

TransportResult w2(const GridDensity &u, const GridDensity &v, const TransportConfig &cfg, SinkhornWarmStart *warm) {
  if (u.grid().dim() == 1 && cfg.allow_exact) return w2_exact_1d(u, v);
  return w2_sinkhorn(u, v, cfg.sinkhorn, warm);
}

} // namespace thinfilm
