#pragma once

#include <map>
#include <string>
#include <vector>

#include "thinfilm/flow.hpp"
#include "thinfilm/jko.hpp"
#include "thinfilm/vector_field.hpp"

namespace thinfilm {

struct CheckPoint {
  int k = 0;
  double lhs = 0.0;
  double rhs = 0.0;
};

/// passed <=> max_violation <= tolerance.
struct CheckReport {
  std::string name;
  double tolerance = 0.0;
  double max_violation = 0.0;
  bool passed = false;
  std::vector<CheckPoint> series;
  /// max_k max(0, lhs - rhs) with no slack; the quantity the tightening protocol tracks.
  double raw_violation = 0.0;
  /// Named scalars specific to one check (reconstructed constants, chain bounds, ...).
  std::map<std::string, double> notes;
};

/// {name, tolerance, max_violation, passed, series: [{k, lhs, rhs}]} plus
/// raw_violation and notes.
std::string to_json(const CheckReport &r);
CheckReport check_report_from_json(const std::string &text);

/// A measured violation counts as shrinking when it drops by 10x, or when both
/// levels are already at rounding.
bool violation_shrinks(double loose, double tight, double factor = 10.0);

/// Separable space-time test function phi(t, x) = theta(t) g(x) with
/// theta(t) = cutoff(|t - t_center|).
class TestFunctionSpec {
public:
  TestFunctionSpec(CutoffQuadratic space, double t_center, SmoothCutoff time);

  double value(double t, const Point &x) const noexcept;
  double time_derivative(double t, const Point &x) const noexcept;
  Point gradient(double t, const Point &x) const noexcept;
  Matrix hessian(double t, const Point &x) const noexcept;
  /// Upper bound on sup |D^2 phi| (operator norm bounded by Frobenius),
  /// sampled on a box around the spatial support and inflated by 1%.
  double lambda() const noexcept { return lambda_; }
  void set_lambda(double l) noexcept { lambda_ = l; }
  double sampled_hessian_sup() const noexcept { return sampled_; }
  const CutoffQuadratic &space() const noexcept { return space_; }
  double time_support_begin() const noexcept { return t_center_ - time_.outer(); }
  double time_support_end() const noexcept { return t_center_ + time_.outer(); }

  /// grad phi(t, .) as a vector field, for operator_N and push-forwards.
  VectorFieldSpec gradient_field(double t) const;

private:
  CutoffQuadratic space_;
  double t_center_;
  SmoothCutoff time_;
  double sampled_ = 0.0;
  double lambda_ = 0.0;
};

/// s in [2m, 2m+1]:   h^d sum (L_{s-m} v) L_m div(eta v)
/// s in (2m+1, 2m+2): h^d sum grad(L_{s-m-1} v) . grad L_m div(eta v)
/// with m = floor(s/2), eta v formed pointwise and all derivatives spectral.
double operator_N(const PeriodicGrid &g, std::span<const double> v, const VectorFieldSpec &eta, double s);
double operator_N(const GridDensity &v, const VectorFieldSpec &eta, double s);

/// Centered difference of F_s along the push-forward by the flow of eta against
/// -N(v, eta). Tolerance on the relative error is max(1e-3, C t_fd^2 / |N|)
/// with C t_fd^2 estimated from a second difference at t_fd / 2.
CheckReport derivative_identity_check(const GridDensity &v, const VectorFieldSpec &eta, double s,
                                      double t_fd = 1e-3, Interpolation kind = Interpolation::spectral);

/// F(u^N) + sum_{k<=N} W_k^2 / (2 tau) <= F(u^0) (1 + 1e-8), every prefix.
CheckReport check_energy_estimate(const Trajectory &traj);

/// m(u^N) <= 2 N tau F(u^0) + 2 m(u^0) + 1e-6 and the chain
/// m(u^N) <= 2 N sum_k W_k^2 + 2 W^2(u^0, delta_0), every prefix.
/// W^2(u^0, delta_0) is the second moment of u^0.
CheckReport check_moment_bound(const Trajectory &traj);

struct DissipationTolerances {
  double relative = 0.05;
  double absolute = 1e-3;
};

/// |u^k|^2_{H^{1+s}} <= (H(u^{k-1}) - H(u^k)) / tau, per step with slack, and the
/// time-integrated bound tau sum |u^k|^2 <= H(u^0) + C (1 + T F(u^0) + m(u^0)).
CheckReport check_entropy_dissipation(const Trajectory &traj, DissipationTolerances tol = {});

/// Heat-flow evolution variational inequality with modulus 0:
/// lhs(t) = (W^2(S_t u, v) - W^2(u, v)) / (2t), rhs = H(v) - H(u), allowance
/// eps(t) = H(u) - H(S_t u) >= 0. Requires lhs <= rhs + eps at every t and the
/// slack rhs - lhs to be nonincreasing in t.
CheckReport check_evi_entropy(const GridDensity &u, const GridDensity &v,
                              const std::vector<double> &t_list = {1e-2, 5e-3, 2.5e-3},
                              const TransportConfig &transport = {});

struct WeakFormTolerances {
  double relative = 0.05;
  double absolute = 1e-6;
};

/// |<phi(t_n), u^n - u^{n-1}> - tau N(u^n, grad phi(t_n))| <= (lambda/2) W^2(u^n, u^{n-1}),
/// t_n = n tau. Notes carry the summed residual, the summed bound and lambda tau F(u^0).
CheckReport check_weak_form_step(const Trajectory &traj, const TestFunctionSpec &phi, WeakFormTolerances tol = {});

struct RefinementRow {
  double tau_coarse = 0.0;
  double tau_fine = 0.0;
  double r = 0.0;
  /// int_0^T |u_coarse(t) - u_fine(t)|^2_{H^{1+r}} dt
  double l2_gap = 0.0;
  /// sup_t |u_coarse(t) - u_fine(t)|_{H^r}
  double sup_gap = 0.0;
  /// previous row's l2_gap / this l2_gap (0 on the first row of each r).
  double ratio = 0.0;
};

struct RefinementReport {
  std::vector<double> taus;
  double horizon = 0.0;
  std::vector<RefinementRow> rows;
  /// Per r: consecutive l2 gaps strictly decrease (or all vanish).
  std::map<double, bool> cauchy;
  bool passed = true;
  std::string failure;
};

/// Runs one trajectory per tau to ceil(T / tau) steps and compares consecutive ones.
RefinementReport tau_refinement_study(const GridDensity &u0, const JkoConfig &base, const std::vector<double> &taus,
                                      double horizon, const std::vector<double> &r_list);
/// Same comparison on precomputed trajectories (sorted by decreasing tau).
RefinementReport compare_trajectories(const std::vector<Trajectory> &trajs, double horizon,
                                      const std::vector<double> &r_list);
std::string to_json(const RefinementReport &r);

} // namespace thinfilm
