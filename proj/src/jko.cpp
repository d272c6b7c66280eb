#include "thinfilm/jko.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <limits>
#include <string>

#include "thinfilm/spectral.hpp"

namespace thinfilm {

void JkoConfig::validate() const {
  if (!(s > 0.0)) throw DomainError("jko: s must be positive");
  if (!(tau > 0.0)) throw DomainError("jko: tau must be positive");
  const auto &in = inner;
  if (in.max_iters < 0 || !(in.grad_tol > 0.0) || !(in.obj_tol >= 0.0) || !(in.alpha0 >= 0.0) ||
      !(in.shrink > 0.0 && in.shrink < 1.0) || !(in.armijo > 0.0 && in.armijo < 1.0) || !(in.alpha_min > 0.0) ||
      !(in.grow >= 1.0))
    throw DomainError("jko: invalid inner solver settings");
  if (stale_potential && stale_period < 1) throw DomainError("jko: stale_period must be >= 1");
}

const GridDensity &Trajectory::density(std::size_t k) const {
  if (k == 0) return initial;
  if (k > steps.size()) throw RangeError("trajectory: step index beyond horizon");
  return steps[k - 1].density;
}

bool Trajectory::densities_complete() const noexcept {
  return std::all_of(has_density.begin(), has_density.end(), [](bool b) { return b; });
}

namespace {

// Relative size of an objective change below which it is not computed by subtraction.
constexpr double kDirectDifferenceFloor = 1e-8;

struct State {
  GridDensity u;
  GridFunction lu; // L_s u
  double w2 = 0.0;
  GridFunction potential;
};

double objective(const PeriodicGrid &g, const State &st, double tau) {
  return 0.5 * inner_product(g, st.u.values(), st.lu) + st.w2 / (2.0 * tau);
}

struct Direction {
  GridFunction centered; // G - <u, G>
  double residual;
};

Direction descent_direction(const State &st, double tau) {
  const auto &g = st.u.grid();
  GridFunction grad(st.lu.size());
  for (std::size_t i = 0; i < grad.size(); ++i) grad[i] = st.lu[i] + st.potential[i] / tau;
  const double mean = inner_product(g, st.u.values(), grad);
  double r2 = 0.0;
  for (std::size_t i = 0; i < grad.size(); ++i) {
    grad[i] -= mean;
    r2 += st.u[i] * grad[i] * grad[i];
  }
  return {std::move(grad), std::sqrt(r2 * g.cell_volume())};
}

GridDensity mirror_update(const GridDensity &u, const GridFunction &centered, double alpha) {
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < centered.size(); ++i)
    if (u[i] > 0.0) top = std::max(top, -alpha * centered[i]);
  std::vector<double> next(u.size());
  for (std::size_t i = 0; i < next.size(); ++i) next[i] = u[i] * std::exp(-alpha * centered[i] - top);
  return GridDensity::normalized(u.grid(), std::move(next));
}

std::string format_residual(double r) {
  std::ostringstream os;
  os << std::setprecision(3) << std::scientific << r;
  return os.str();
}

} // namespace

StepRecord jko_step(const GridDensity &u_prev, const JkoConfig &cfg, int index) {
  cfg.validate();
  require_same_grid(u_prev.grid(), cfg.grid, "jko_step");
  const auto &g = cfg.grid;
  const double tau = cfg.tau;
  const auto &opt = cfg.inner;
  const double alpha0 = opt.alpha0 > 0.0 ? opt.alpha0 : tau;

  SinkhornWarmStart warm;
  auto fresh = [&](const GridDensity &u, SinkhornWarmStart &ws) {
    TransportResult tr = w2(u, u_prev, cfg.transport, &ws);
    return State{u, fractional_laplacian(u, cfg.s), tr.w2_squared, std::move(tr.potential)};
  };

  State cur = fresh(u_prev, warm);
  // Last state whose transport term was solved exactly rather than linearized.
  State verified = cur;
  double verified_obj = objective(g, cur, tau);
  bool stale = cfg.stale_potential;

  Direction dir = descent_direction(cur, tau);
  double obj = verified_obj;
  double alpha_last = alpha0;
  int iters = 0;

  while (dir.residual > opt.grad_tol && iters < opt.max_iters) {
    if (stale && (iters + 1) % cfg.stale_period == 0) {
      // Refresh: the exact objective at the current point must improve on the
      // last verified one; otherwise fall back to it and continue exactly.
      State exact = fresh(cur.u, warm);
      const double exact_obj = objective(g, exact, tau);
      if (exact_obj < verified_obj) {
        cur = std::move(exact);
        verified = cur;
        verified_obj = exact_obj;
      } else {
        cur = verified;
        stale = false;
      }
      obj = verified_obj;
      dir = descent_direction(cur, tau);
      if (dir.residual <= opt.grad_tol) break;
    }
    const bool linearize = stale && (iters + 1) % cfg.stale_period != 0;
    double alpha = std::min(alpha0, opt.grow * alpha_last);
    Direction next_dir;
    for (;;) {
      GridDensity trial_u = mirror_update(cur.u, dir.centered, alpha);
      State trial{trial_u, fractional_laplacian(trial_u, cfg.s), 0.0, {}};
      SinkhornWarmStart trial_warm = warm;
      if (linearize) {
        double lin = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) lin += verified.potential[i] * (trial.u[i] - verified.u[i]);
        trial.w2 = verified.w2 + 2.0 * g.cell_volume() * lin;
        trial.potential = verified.potential;
      } else {
        TransportResult tr = w2(trial.u, u_prev, cfg.transport, &trial_warm);
        trial.w2 = tr.w2_squared;
        trial.potential = std::move(tr.potential);
      }
      Direction trial_dir = descent_direction(trial, tau);
      // Direct difference; the energy part is the exact trapezoid rule of a quadratic.
      double d_energy = 0.0, slope = 0.0, trapezoid = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double delta = trial.u[i] - cur.u[i];
        d_energy += delta * (trial.lu[i] + cur.lu[i]);
        slope += delta * dir.centered[i];
        trapezoid += delta * (trial_dir.centered[i] + dir.centered[i]);
      }
      d_energy *= 0.5 * g.cell_volume();
      slope *= g.cell_volume();
      trapezoid *= 0.5 * g.cell_volume();
      double d_obj = d_energy + (trial.w2 - cur.w2) / (2.0 * tau);
      // Once the change nears rounding of the objective itself, switch to the
      // trapezoid rule on centered gradients: centering cancels the rounding of
      // the normalization, and its error is third order in delta.
      if (std::abs(d_obj) <= kDirectDifferenceFloor * std::abs(obj)) d_obj = trapezoid;
      if (d_obj < 0.0 && d_obj <= opt.armijo * slope) {
        cur = std::move(trial);
        warm = std::move(trial_warm);
        obj += d_obj;
        next_dir = std::move(trial_dir);
        break;
      }
      alpha *= opt.shrink;
      if (alpha < opt.alpha_min)
        throw StagnationError("jko_step: no decreasing step above alpha_min at iteration " +
                                  std::to_string(iters) + " (residual " + format_residual(dir.residual) + ")",
                              cur.u);
    }
    ++iters;
    alpha_last = alpha;
    const double decrease = verified_obj - obj;
    if (!linearize) {
      if (stale) verified = cur;
      verified_obj = obj;
    }
    dir = std::move(next_dir);
    if (!stale && opt.obj_tol > 0.0 && decrease <= opt.obj_tol * std::abs(obj)) break;
  }

  if (stale) {
    // Finish on an exactly evaluated state.
    State exact = fresh(cur.u, warm);
    cur = (objective(g, exact, tau) < verified_obj) ? std::move(exact) : verified;
    dir = descent_direction(cur, tau);
  }

  const double e = energy(cur.u, cfg.s);
  return StepRecord{index,
                    cur.u,
                    cur.w2,
                    e,
                    entropy(cur.u),
                    second_moment(cur.u),
                    iters,
                    dir.residual,
                    e + cur.w2 / (2.0 * tau)};
}

Trajectory run(const GridDensity &u0, const JkoConfig &cfg, int num_steps) {
  if (num_steps < 0) throw DomainError("run: num_steps must be >= 0");
  cfg.validate();
  require_same_grid(u0.grid(), cfg.grid, "run");
  Trajectory traj{cfg, u0, {}, RunStatus::completed, {}, {}};
  traj.steps.reserve(static_cast<std::size_t>(num_steps));
  for (int k = 1; k <= num_steps; ++k) {
    try {
      traj.steps.push_back(jko_step(traj.density(traj.steps.size()), cfg, k));
    } catch (const std::exception &ex) {
      traj.status = RunStatus::failed;
      traj.failure = "step " + std::to_string(k) + ": " + ex.what();
      break;
    }
  }
  return traj;
}

const GridDensity &interpolant(const Trajectory &traj, double t) {
  if (!(t >= 0.0)) throw DomainError("interpolant: t must be >= 0");
  if (t == 0.0) return traj.initial;
  const std::size_t n = traj.steps.size();
  if (t > traj.horizon()) throw RangeError("interpolant: t beyond the trajectory horizon");
  auto k = static_cast<std::size_t>(std::ceil(t / traj.config.tau));
  // t <= n tau was checked in time units; a quotient rounding just above n stays at n.
  k = std::clamp<std::size_t>(k, 1, n);
  return traj.steps[k - 1].density;
}

} // namespace thinfilm
