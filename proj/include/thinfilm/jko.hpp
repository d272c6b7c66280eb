#pragma once

#include <optional>
#include <string>
#include <vector>

#include "thinfilm/density.hpp"
#include "thinfilm/error.hpp"
#include "thinfilm/transport.hpp"

namespace thinfilm {

struct InnerSolverOptions {
  int max_iters = 20000;
  /// Stop when the simplex-projected gradient norm sqrt(<u, (G - <u,G>)^2>) falls below this.
  double grad_tol = 1e-8;
  /// Stop when one accepted step lowers the objective by less than obj_tol * |objective|.
  /// Zero disables the test. Near a minimizer one step lowers the objective by
  /// about alpha * residual^2, so any positive value stops before grad_tol does.
  double obj_tol = 0.0;
  /// First trial step; zero means "use tau".
  double alpha0 = 0.0;
  double shrink = 0.5;
  double armijo = 1e-4;
  double alpha_min = 1e-12;
  /// Each iteration starts from min(alpha0, grow * last accepted step).
  double grow = 2.0;

  bool operator==(const InnerSolverOptions &) const = default;
};

struct JkoConfig {
  double s = 1.0;
  double tau = 1e-3;
  InnerSolverOptions inner;
  TransportConfig transport;
  PeriodicGrid grid{1, 256, 40.0};
  /// Refresh the transport potential only every `stale_period` inner iterations.
  /// Speed option; acceptance runs keep this off.
  bool stale_potential = false;
  int stale_period = 5;

  /// Throws DomainError on s <= 0, tau <= 0 or non-positive tolerances.
  void validate() const;
};

struct StepRecord {
  int index = 0;
  GridDensity density;
  double w2_to_prev = 0.0;
  double energy = 0.0;
  double entropy = 0.0;
  double second_moment = 0.0;
  int inner_iterations = 0;
  double kkt_residual = 0.0;
  /// energy + w2_to_prev / (2 tau)
  double objective_value = 0.0;
};

enum class RunStatus { completed, failed };

struct Trajectory {
  JkoConfig config;
  GridDensity initial;
  std::vector<StepRecord> steps;
  RunStatus status = RunStatus::completed;
  /// "step k: <reason>" when status == failed.
  std::string failure;
  /// Per step k = 1..N: whether steps[k-1].density holds the actual iterate.
  /// Empty means all do. Only trajectories reloaded from sparse snapshots clear entries.
  std::vector<bool> has_density;

  bool densities_complete() const noexcept;

  double horizon() const noexcept { return config.tau * static_cast<double>(steps.size()); }
  /// u^k for k = 0..steps.size().
  const GridDensity &density(std::size_t k) const;
};

/// Backtracking could not find a decreasing step above alpha_min.
class StagnationError : public NumericalFailure {
public:
  StagnationError(const std::string &what, GridDensity last) : NumericalFailure(what), last_(std::move(last)) {}
  const GridDensity &last_iterate() const noexcept { return last_; }

private:
  GridDensity last_;
};

/// One minimizing-movement step: argmin_u F_s(u) + W^2(u, u_prev) / (2 tau),
/// by mirror descent u <- u exp(-alpha (G - <u,G>)) / mass started at u_prev,
/// with G = L_s u + phi / tau and Armijo backtracking. The objective never
/// exceeds F_s(u_prev), which is its value at the starting point.
StepRecord jko_step(const GridDensity &u_prev, const JkoConfig &cfg, int index = 1);

/// Iterates jko_step. A failing step ends the run with status failed and the
/// completed steps kept.
Trajectory run(const GridDensity &u0, const JkoConfig &cfg, int num_steps);

/// Piecewise-constant interpolant: u^0 at t = 0, u^k for t in ((k-1) tau, k tau].
const GridDensity &interpolant(const Trajectory &traj, double t);

} // namespace thinfilm
