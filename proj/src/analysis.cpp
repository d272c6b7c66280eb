#include "thinfilm/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include <json.hpp>

#include "thinfilm/error.hpp"
#include "thinfilm/spectral.hpp"

namespace thinfilm {

using nlohmann::json;

// --- reports --------------------------------------------------------------

std::string to_json(const CheckReport &r) {
  json j;
  j["name"] = r.name;
  j["tolerance"] = r.tolerance;
  j["max_violation"] = r.max_violation;
  j["passed"] = r.passed;
  j["raw_violation"] = r.raw_violation;
  j["series"] = json::array();
  for (const auto &p : r.series) j["series"].push_back({{"k", p.k}, {"lhs", p.lhs}, {"rhs", p.rhs}});
  j["notes"] = json::object();
  for (const auto &[k, v] : r.notes) j["notes"][k] = v;
  return j.dump(2);
}

CheckReport check_report_from_json(const std::string &text) {
  try {
    const json j = json::parse(text);
    CheckReport r;
    r.name = j.at("name").get<std::string>();
    r.tolerance = j.at("tolerance").get<double>();
    r.max_violation = j.at("max_violation").get<double>();
    r.passed = j.at("passed").get<bool>();
    r.raw_violation = j.value("raw_violation", 0.0);
    for (const auto &p : j.at("series"))
      r.series.push_back({p.at("k").get<int>(), p.at("lhs").get<double>(), p.at("rhs").get<double>()});
    if (j.contains("notes"))
      for (const auto &[k, v] : j.at("notes").items()) r.notes[k] = v.get<double>();
    return r;
  } catch (const json::exception &e) {
    throw ConfigError(std::string("check report: ") + e.what());
  }
}

bool violation_shrinks(double loose, double tight, double factor) {
  constexpr double kRounding = 1e-15;
  return tight <= loose / factor + kRounding;
}

namespace {

void finish(CheckReport &r) {
  if (r.series.empty() && !std::isfinite(r.max_violation)) r.max_violation = 0.0;
  r.passed = r.max_violation <= r.tolerance;
}

void require_densities(const Trajectory &traj, const char *where) {
  if (!traj.densities_complete())
    throw DomainError(std::string(where) + ": needs the density of every step (snapshot stride 1)");
}

constexpr double kLowest = -std::numeric_limits<double>::infinity();

} // namespace

// --- test functions -------------------------------------------------------

TestFunctionSpec::TestFunctionSpec(CutoffQuadratic space, double t_center, SmoothCutoff time)
    : space_(std::move(space)), t_center_(t_center), time_(time) {
  const int d = space_.dim();
  const double r = space_.support_radius();
  const int per_axis = d == 1 ? 4001 : (d == 2 ? 401 : 81);
  std::size_t total = 1;
  for (int a = 0; a < d; ++a) total *= static_cast<std::size_t>(per_axis);
  const double step = 2.0 * r / (per_axis - 1);
  double sup = 0.0;
  for (std::size_t flat = 0; flat < total; ++flat) {
    Point x{};
    std::size_t rem = flat;
    for (int a = d - 1; a >= 0; --a) {
      x[a] = space_.center()[a] - r + step * static_cast<double>(rem % per_axis);
      rem /= per_axis;
    }
    sup = std::max(sup, frobenius(space_.hessian(x), d));
  }
  // sup |theta| = 1.
  sampled_ = sup;
  lambda_ = 1.01 * sup;
}

double TestFunctionSpec::value(double t, const Point &x) const noexcept {
  return time_.value(std::abs(t - t_center_)) * space_.value(x);
}

double TestFunctionSpec::time_derivative(double t, const Point &x) const noexcept {
  const double dt = t - t_center_;
  const double sign = dt < 0.0 ? -1.0 : 1.0;
  const double d1 = std::abs(dt) > time_.inner() ? time_.d1(std::abs(dt)) : 0.0;
  return sign * d1 * space_.value(x);
}

Point TestFunctionSpec::gradient(double t, const Point &x) const noexcept {
  const double th = time_.value(std::abs(t - t_center_));
  Point g = space_.gradient(x);
  for (auto &c : g) c *= th;
  return g;
}

Matrix TestFunctionSpec::hessian(double t, const Point &x) const noexcept {
  const double th = time_.value(std::abs(t - t_center_));
  Matrix h = space_.hessian(x);
  for (auto &row : h)
    for (auto &c : row) c *= th;
  return h;
}

VectorFieldSpec TestFunctionSpec::gradient_field(double t) const {
  return thinfilm::gradient_field(space_, time_.value(std::abs(t - t_center_)));
}

// --- operator N -----------------------------------------------------------

double operator_N(const PeriodicGrid &g, std::span<const double> v, const VectorFieldSpec &eta, double s) {
  if (!(s > 0.0)) throw DomainError("operator_N: s must be positive");
  require_size(g, v, "operator_N");
  if (eta.dim != g.dim()) throw DimensionError("operator_N: field and grid dimensions differ");
  const int d = g.dim();
  const int m = static_cast<int>(std::floor(s / 2.0));

  std::vector<GridFunction> flux(d, GridFunction(g.size(), 0.0));
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Point x = g.node(i);
    if (eta.outside_support(x)) continue;
    const Point e = eta.value(x);
    for (int a = 0; a < d; ++a) flux[a][i] = e[a] * v[i];
  }
  GridFunction w = divergence(g, flux);
  if (m > 0) w = fractional_laplacian(g, w, m);

  if (s <= 2.0 * m + 1.0) {
    const GridFunction lv = fractional_laplacian(g, v, s - m);
    return inner_product(g, lv, w);
  }
  const GridFunction lv = fractional_laplacian(g, v, s - m - 1.0);
  double total = 0.0;
  for (int a = 0; a < d; ++a)
    total += inner_product(g, partial_derivative(g, lv, a), partial_derivative(g, w, a));
  return total;
}

double operator_N(const GridDensity &v, const VectorFieldSpec &eta, double s) {
  return operator_N(v.grid(), v.values(), eta, s);
}

CheckReport derivative_identity_check(const GridDensity &v, const VectorFieldSpec &eta, double s, double t_fd,
                                      Interpolation kind) {
  if (!(t_fd > 0.0)) throw DomainError("derivative_identity_check: t_fd must be positive");
  auto along = [&](double t) { return energy(pushforward(v, eta, t, kind).density, s); };
  const double target = -operator_N(v, eta, s);
  const double fd = (along(t_fd) - along(-t_fd)) / (2.0 * t_fd);
  const double fd_half = (along(0.5 * t_fd) - along(-0.5 * t_fd)) / t_fd;

  CheckReport r;
  r.name = "derivative_identity";
  r.series = {{0, fd, target}, {1, fd_half, target}};
  const double scale = std::abs(target);
  if (scale == 0.0) {
    r.tolerance = 1e-14;
    r.max_violation = std::abs(fd);
  } else {
    const double richardson = (4.0 / 3.0) * std::abs(fd - fd_half) / scale;
    r.tolerance = std::max(1e-3, richardson);
    r.max_violation = std::abs(fd - target) / scale;
    r.notes["richardson_relative"] = richardson;
  }
  r.raw_violation = r.max_violation;
  r.notes["t_fd"] = t_fd;
  r.notes["N"] = -target;
  finish(r);
  return r;
}

// --- scheme inequalities --------------------------------------------------

CheckReport check_energy_estimate(const Trajectory &traj) {
  const double s = traj.config.s;
  const double tau = traj.config.tau;
  const double f0 = energy(traj.initial, s);
  CheckReport r;
  r.name = "energy_estimate";
  // Rounding floor for a vanishing initial energy.
  r.tolerance = 1e-8 * std::abs(f0) + 1e-15;
  r.max_violation = 0.0;
  r.series.push_back({0, f0, f0});
  double dissipation = 0.0;
  for (const auto &st : traj.steps) {
    dissipation += st.w2_to_prev / (2.0 * tau);
    const double lhs = st.energy + dissipation;
    r.series.push_back({st.index, lhs, f0});
    r.max_violation = std::max(r.max_violation, lhs - f0);
  }
  r.raw_violation = std::max(0.0, r.max_violation);
  r.notes["initial_energy"] = f0;
  r.notes["dissipation"] = dissipation;
  finish(r);
  return r;
}

CheckReport check_moment_bound(const Trajectory &traj) {
  const double s = traj.config.s;
  const double tau = traj.config.tau;
  const double f0 = energy(traj.initial, s);
  const double m0 = second_moment(traj.initial);
  const auto &g = traj.initial.grid();
  // W^2 between the cell-wise constant reading of u^0 and a Dirac mass at the
  // origin: node moment plus the in-cell variance d h^2 / 12.
  const double w2_spike = m0 + g.dim() * g.spacing() * g.spacing() / 12.0;

  CheckReport r;
  r.name = "moment_bound";
  r.tolerance = 1e-6;
  r.series.push_back({0, m0, 2.0 * m0});
  r.max_violation = m0 - 2.0 * m0;
  double sum_w2 = 0.0;
  double worst_a = kLowest, worst_chain = kLowest;
  for (const auto &st : traj.steps) {
    sum_w2 += st.w2_to_prev;
    const double n = static_cast<double>(st.index);
    const double bound_a = 2.0 * n * tau * f0 + 2.0 * m0;
    const double bound_chain = 2.0 * n * sum_w2 + 2.0 * w2_spike;
    const double lhs = st.second_moment;
    r.series.push_back({st.index, lhs, std::min(bound_a, bound_chain)});
    worst_a = std::max(worst_a, lhs - bound_a);
    worst_chain = std::max(worst_chain, lhs - bound_chain);
    r.max_violation = std::max(r.max_violation, lhs - std::min(bound_a, bound_chain));
  }
  r.raw_violation = std::max(0.0, r.max_violation);
  if (!traj.steps.empty()) {
    r.notes["max_violation_moment"] = worst_a;
    r.notes["max_violation_chain"] = worst_chain;
  }
  r.notes["initial_moment"] = m0;
  finish(r);
  return r;
}

CheckReport check_entropy_dissipation(const Trajectory &traj, DissipationTolerances tol) {
  require_densities(traj, "check_entropy_dissipation");
  const double s = traj.config.s;
  const double tau = traj.config.tau;
  const auto &g = traj.initial.grid();
  const int d = g.dim();
  const double h0 = entropy(traj.initial);
  const double f0 = energy(traj.initial, s);
  const double m0 = second_moment(traj.initial);
  // Entropy lower bound -1/e - (d/2) log(4 pi) - m/4 combined with
  // m(u^N) <= 2 T F(u^0) + 2 m(u^0) gives H(u^0) - H(u^N) <= H(u^0) + C (1 + T F + m).
  const double c_const = std::max(1.0 / std::numbers::e + 0.5 * d * std::log(4.0 * std::numbers::pi), 0.5);

  CheckReport r;
  r.name = "entropy_dissipation";
  r.tolerance = tol.absolute;
  r.max_violation = traj.steps.empty() ? 0.0 : kLowest;
  double prev_h = h0;
  double integrated = 0.0;
  double worst_integrated = kLowest;
  for (const auto &st : traj.steps) {
    const double lhs = sobolev_norm_sq(g, st.density.values(), 1.0 + s, true);
    const double rhs = (prev_h - st.entropy) / tau;
    r.series.push_back({st.index, lhs, rhs});
    r.max_violation = std::max(r.max_violation, lhs - rhs - tol.relative * std::abs(rhs));
    r.raw_violation = std::max(r.raw_violation, lhs - rhs);
    integrated += tau * lhs;
    const double t = tau * st.index;
    const double bound = h0 + c_const * (1.0 + t * f0 + m0);
    worst_integrated = std::max(worst_integrated, integrated - (1.0 + tol.relative) * bound);
    prev_h = st.entropy;
  }
  if (!traj.steps.empty()) r.max_violation = std::max(r.max_violation, worst_integrated);
  r.notes["integrated_constant"] = c_const;
  r.notes["integrated_dissipation"] = integrated;
  if (!traj.steps.empty()) r.notes["integrated_max_violation"] = worst_integrated;
  finish(r);
  return r;
}

CheckReport check_evi_entropy(const GridDensity &u, const GridDensity &v, const std::vector<double> &t_list,
                              const TransportConfig &transport) {
  require_same_grid(u.grid(), v.grid(), "check_evi_entropy");
  if (t_list.empty()) throw DomainError("check_evi_entropy: empty t_list");
  std::vector<double> ts = t_list;
  for (double t : ts)
    if (!(t > 0.0)) throw DomainError("check_evi_entropy: times must be positive");
  std::sort(ts.begin(), ts.end(), std::greater<>());

  const double hu = entropy(u);
  const double rhs = entropy(v) - hu;
  const double w0 = w2(u, v, transport).w2_squared;

  CheckReport r;
  r.name = "evi_entropy";
  // Rounding floor on differences of O(1) transport values.
  r.tolerance = 1e-12;
  r.max_violation = kLowest;
  double prev_slack = kLowest, prev_eps = std::numeric_limits<double>::infinity();
  double worst_monotone = kLowest;
  int k = 0;
  for (double t : ts) {
    const GridDensity st = heat_semigroup(u, t);
    const double lhs = (w2(st, v, transport).w2_squared - w0) / (2.0 * t);
    const double eps = hu - entropy(st);
    r.series.push_back({k++, lhs, rhs + eps});
    r.max_violation = std::max(r.max_violation, lhs - rhs - eps);
    r.raw_violation = std::max(r.raw_violation, lhs - rhs);
    const double slack = rhs - lhs;
    // Along decreasing t the slack may only grow and the allowance only shrink.
    worst_monotone = std::max({worst_monotone, prev_slack - slack, eps - prev_eps});
    prev_slack = slack;
    prev_eps = eps;
    r.notes["allowance_t" + std::to_string(k - 1)] = eps;
  }
  r.notes["max_monotonicity_defect"] = worst_monotone;
  r.max_violation = std::max(r.max_violation, worst_monotone);
  finish(r);
  return r;
}

CheckReport check_weak_form_step(const Trajectory &traj, const TestFunctionSpec &phi, WeakFormTolerances tol) {
  require_densities(traj, "check_weak_form_step");
  const double s = traj.config.s;
  const double tau = traj.config.tau;
  const auto &g = traj.initial.grid();
  const double lambda = phi.lambda();

  CheckReport r;
  r.name = "weak_form_step";
  r.tolerance = tol.absolute;
  r.max_violation = traj.steps.empty() ? 0.0 : kLowest;
  double summed_residual = 0.0, summed_bound = 0.0;
  GridFunction phi_t(g.size());
  for (const auto &st : traj.steps) {
    const double t = tau * st.index;
    if (phi.space().dim() != g.dim()) throw DimensionError("check_weak_form_step: test function dimension");
    for (std::size_t i = 0; i < g.size(); ++i) phi_t[i] = phi.value(t, g.node(i));
    const GridDensity &prev = traj.density(static_cast<std::size_t>(st.index - 1));
    double pairing = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) pairing += phi_t[i] * (st.density[i] - prev[i]);
    pairing *= g.cell_volume();
    const double residual = pairing - tau * operator_N(st.density, phi.gradient_field(t), s);
    const double lhs = std::abs(residual);
    const double rhs = 0.5 * lambda * st.w2_to_prev;
    r.series.push_back({st.index, lhs, rhs});
    r.max_violation = std::max(r.max_violation, lhs - (1.0 + tol.relative) * rhs);
    r.raw_violation = std::max(r.raw_violation, lhs - rhs);
    summed_residual += residual;
    summed_bound += rhs;
  }
  r.notes["lambda"] = lambda;
  r.notes["summed_residual"] = summed_residual;
  r.notes["summed_bound"] = summed_bound;
  r.notes["energy_bound"] = lambda * tau * energy(traj.initial, s);
  finish(r);
  return r;
}

// --- refinement -----------------------------------------------------------

RefinementReport compare_trajectories(const std::vector<Trajectory> &trajs, double horizon,
                                      const std::vector<double> &r_list) {
  if (!(horizon > 0.0)) throw DomainError("tau_refinement_study: horizon must be positive");
  RefinementReport rep;
  rep.horizon = horizon;
  for (const auto &t : trajs) {
    rep.taus.push_back(t.config.tau);
    if (!t.densities_complete()) throw DomainError("tau_refinement_study: incomplete trajectory");
    if (t.horizon() < horizon * (1.0 - 1e-12))
      throw DomainError("tau_refinement_study: trajectory shorter than the horizon");
  }
  for (std::size_t i = 1; i < rep.taus.size(); ++i)
    if (!(rep.taus[i] < rep.taus[i - 1])) throw DomainError("tau_refinement_study: taus must strictly decrease");

  for (double r : r_list) {
    double prev = 0.0;
    bool cauchy = true;
    for (std::size_t i = 0; i + 1 < trajs.size(); ++i) {
      const Trajectory &a = trajs[i], &b = trajs[i + 1];
      // Merged breakpoints k tau_a and k tau_b inside [0, T].
      std::vector<double> cuts{0.0, horizon};
      for (const Trajectory *tr : {&a, &b})
        for (std::size_t k = 1; k <= tr->steps.size(); ++k) {
          const double t = tr->config.tau * static_cast<double>(k);
          if (t < horizon) cuts.push_back(t);
        }
      std::sort(cuts.begin(), cuts.end());
      cuts.erase(std::unique(cuts.begin(), cuts.end(),
                             [](double x, double y) { return std::abs(x - y) <= 1e-12 * std::max(1.0, std::abs(y)); }),
                 cuts.end());
      const auto &g = a.initial.grid();
      RefinementRow row{a.config.tau, b.config.tau, r, 0.0, 0.0, 0.0};
      for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
        const double mid = 0.5 * (cuts[c] + cuts[c + 1]);
        const GridDensity &ua = interpolant(a, mid), &ub = interpolant(b, mid);
        GridFunction diff(g.size());
        for (std::size_t j = 0; j < diff.size(); ++j) diff[j] = ua[j] - ub[j];
        row.l2_gap += (cuts[c + 1] - cuts[c]) * sobolev_norm_sq(g, diff, 1.0 + r, false);
        row.sup_gap = std::max(row.sup_gap, std::sqrt(sobolev_norm_sq(g, diff, r, false)));
      }
      if (i > 0) {
        row.ratio = row.l2_gap > 0.0 ? prev / row.l2_gap : 0.0;
        constexpr double kVanishing = 1e-24;
        if (!(row.l2_gap < prev || (prev <= kVanishing && row.l2_gap <= kVanishing))) cauchy = false;
      }
      prev = row.l2_gap;
      rep.rows.push_back(row);
    }
    rep.cauchy[r] = cauchy;
    if (!cauchy) rep.passed = false;
  }
  return rep;
}

RefinementReport tau_refinement_study(const GridDensity &u0, const JkoConfig &base, const std::vector<double> &taus,
                                      double horizon, const std::vector<double> &r_list) {
  for (double r : r_list)
    if (!(r >= 0.0 && r < base.s)) throw DomainError("tau_refinement_study: need 0 <= r < s");
  for (double tau : taus) {
    JkoConfig cfg = base;
    cfg.tau = tau;
    cfg.validate();
  }
  // Independent trajectories, one per worker; failures are recorded in each trajectory.
  std::vector<std::optional<Trajectory>> slots(taus.size());
  const int count = static_cast<int>(taus.size());
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < count; ++i) {
    JkoConfig cfg = base;
    cfg.tau = taus[static_cast<std::size_t>(i)];
    const int steps = static_cast<int>(std::ceil(horizon / cfg.tau - 1e-9));
    slots[static_cast<std::size_t>(i)] = run(u0, cfg, steps);
  }
  std::vector<Trajectory> trajs;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i]->status != RunStatus::completed) {
      RefinementReport rep;
      rep.taus = taus;
      rep.horizon = horizon;
      rep.passed = false;
      rep.failure = "tau=" + std::to_string(taus[i]) + ": " + slots[i]->failure;
      return rep;
    }
    trajs.push_back(std::move(*slots[i]));
  }
  return compare_trajectories(trajs, horizon, r_list);
}

std::string to_json(const RefinementReport &r) {
  json j;
  j["taus"] = r.taus;
  j["horizon"] = r.horizon;
  j["passed"] = r.passed;
  if (!r.failure.empty()) j["failure"] = r.failure;
  j["rows"] = json::array();
  for (const auto &row : r.rows)
    j["rows"].push_back({{"tau_coarse", row.tau_coarse},
                         {"tau_fine", row.tau_fine},
                         {"r", row.r},
                         {"l2_gap", row.l2_gap},
                         {"sup_gap", row.sup_gap},
                         {"ratio", row.ratio}});
  j["cauchy"] = json::array();
  for (const auto &[rr, ok] : r.cauchy) j["cauchy"].push_back({{"r", rr}, {"decreasing", ok}});
  return j.dump(2);
}

} // namespace thinfilm
