#pragma once

// Data-parallel inner loops. Every kernel has an OpenMP version (the one the
// library calls) and a serial reference in `reference::` that runs the same
// per-node arithmetic in a plain loop; tests require the two to agree bit for
// bit, and the benchmark target times them against each other.

#include <span>
#include <vector>

#include "thinfilm/grid.hpp"
#include "thinfilm/vector_field.hpp"

namespace thinfilm {

enum class Interpolation { cubic, spectral };

namespace kernels {

/// out(y) = log sum_x exp(in(x) - |x - y|^2 / eps), evaluated axis by axis
/// (the quadratic cost is separable). Entries of `in` may be -inf.
void separable_logsumexp(const PeriodicGrid &g, std::span<const double> in, double eps, std::span<double> out);

/// Backward characteristics X_{-t}(x) and det(grad X_{-t}(x)) at every node.
struct BackwardFlow {
  std::vector<Point> origin;
  std::vector<double> det;
  std::vector<unsigned char> moved;
};
BackwardFlow backward_flow(const PeriodicGrid &g, const VectorFieldSpec &eta, double t);

/// Values of the grid function `f` at the points `where` (only where `mask` is set;
/// other entries copy f at the node).
std::vector<double> interpolate(const PeriodicGrid &g, std::span<const double> f, const std::vector<Point> &where,
                                const std::vector<unsigned char> &mask, Interpolation kind);

namespace reference {
void separable_logsumexp(const PeriodicGrid &g, std::span<const double> in, double eps, std::span<double> out);
/// Direct O(N^2) sum over all node pairs; the independent oracle for the separable kernel.
void dense_logsumexp(const PeriodicGrid &g, std::span<const double> in, double eps, std::span<double> out);
BackwardFlow backward_flow(const PeriodicGrid &g, const VectorFieldSpec &eta, double t);
std::vector<double> interpolate(const PeriodicGrid &g, std::span<const double> f, const std::vector<Point> &where,
                                const std::vector<unsigned char> &mask, Interpolation kind);
} // namespace reference

} // namespace kernels
} // namespace thinfilm
