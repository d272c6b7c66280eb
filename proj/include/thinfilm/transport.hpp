#pragma once

#include <optional>
#include <string>

#include "thinfilm/density.hpp"

namespace thinfilm {

enum class TransportMethod { exact_1d, sinkhorn };

std::string to_string(TransportMethod m);

struct TransportResult {
  double w2_squared = 0.0;
  /// First variation of (1/2) W^2(., v) at u, one value per node, zero grid mean.
  GridFunction potential;
  TransportMethod method = TransportMethod::exact_1d;
  std::optional<double> sinkhorn_epsilon;
  int iterations = 0;
  double marginal_error = 0.0;
};

/// Exact quadratic Wasserstein distance in one dimension.
///
/// Node values are read as a piecewise-constant density on the cells
/// [x_j - h/2, x_j + h/2). Both CDFs are then piecewise linear, the monotone map
/// T = F_v^{-1} o F_u is piecewise linear between merged breakpoints, and W^2,
/// the Kantorovich potential phi (phi' = x - T(x)) and its cell averages are
/// integrated in closed form. The returned potential is the cell average of
/// phi, which is the exact gradient of (1/2) W^2 with respect to the cell values.
TransportResult w2_exact_1d(const GridDensity &u, const GridDensity &v);

struct SinkhornOptions {
  double epsilon = 0.025;
  int max_iter = 20000;
  double tol = 1e-9;

  bool operator==(const SinkhornOptions &) const = default;
};

/// Warm-start potentials for repeated Sinkhorn solves against the same target.
struct SinkhornWarmStart {
  GridFunction f, g, self_u, self_v;
};

/// Debiased Sinkhorn divergence S_eps(u, v) = OT_eps(u, v) - OT_eps(u, u)/2 - OT_eps(v, v)/2
/// on the flat cost |x - y|^2, computed with log-domain iterations and separable
/// Gaussian-kernel convolutions. Throws ConvergenceError if the plan marginals
/// do not reach `tol` (L1) within max_iter.
TransportResult w2_sinkhorn(const GridDensity &u, const GridDensity &v, const SinkhornOptions &opt,
                            SinkhornWarmStart *warm = nullptr);

struct TransportConfig {
  /// Use the exact 1D solver whenever d == 1.
  bool allow_exact = true;
  SinkhornOptions sinkhorn;
};

TransportResult w2(const GridDensity &u, const GridDensity &v, const TransportConfig &cfg,
                   SinkhornWarmStart *warm = nullptr);

} // namespace thinfilm
