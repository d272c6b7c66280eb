#include <cmath>

#include <gtest/gtest.h>

#include "thinfilm/error.hpp"
#include "thinfilm/jko.hpp"
#include "thinfilm/spectral.hpp"

using namespace thinfilm;

namespace {

Point at(double x) {
  Point p{};
  p[0] = x;
  return p;
}

JkoConfig small_config() {
  JkoConfig c;
  c.grid = PeriodicGrid(1, 128, 30.0);
  return c;
}

} // namespace

TEST(Jko, ConfigValidation) {
  JkoConfig c;
  EXPECT_NO_THROW(c.validate());
  c.tau = 0.0;
  EXPECT_THROW(c.validate(), DomainError);
  c = JkoConfig{};
  c.s = -1.0;
  EXPECT_THROW(c.validate(), DomainError);
  c = JkoConfig{};
  c.inner.shrink = 1.5;
  EXPECT_THROW(c.validate(), DomainError);
  c = JkoConfig{};
  c.stale_potential = true;
  c.stale_period = 0;
  EXPECT_THROW(c.validate(), DomainError);
}

TEST(Jko, StepKeepsMassPositivityAndDescends) {
  const JkoConfig c = small_config();
  const GridDensity u0 = gaussian_density(c.grid, at(0.0), 1.0);
  const StepRecord st = jko_step(u0, c);
  EXPECT_LE(std::abs(st.density.mass() - 1.0), 1e-12);
  EXPECT_GE(st.density.min_value(), 0.0);
  EXPECT_LE(st.kkt_residual, c.inner.grad_tol);
  // The minimizer beats staying put.
  EXPECT_LE(st.energy + st.w2_to_prev / (2.0 * c.tau), energy(u0, c.s));
  EXPECT_NEAR(st.objective_value, st.energy + st.w2_to_prev / (2.0 * c.tau), 1e-14);
  EXPECT_NEAR(st.entropy, entropy(st.density), 1e-14);
  EXPECT_NEAR(st.second_moment, second_moment(st.density), 1e-14);
}

TEST(Jko, UniformIsFixedPoint) {
  const JkoConfig c = small_config();
  const StepRecord st = jko_step(uniform_density(c.grid), c);
  EXPECT_LT(std::abs(st.energy), 1e-14);
  EXPECT_LT(st.w2_to_prev, 1e-20);
  EXPECT_EQ(st.inner_iterations, 0);
}

TEST(Jko, TinyTauBarelyMoves) {
  JkoConfig c = small_config();
  c.tau = 1e-6;
  const GridDensity u0 = gaussian_density(c.grid, at(0.0), 1.0);
  const StepRecord st = jko_step(u0, c);
  // W^2 <= 2 tau (F(u0) - F(u1)) <= 2 tau F(u0).
  EXPECT_LE(st.w2_to_prev, 2.0 * c.tau * energy(u0, c.s));
}

TEST(Jko, LargeTauApproachesEnergyMinimum) {
  JkoConfig c = small_config();
  c.tau = 1e3;
  const GridDensity u0 = gaussian_density(c.grid, at(2.0), 1.0);
  const StepRecord st = jko_step(u0, c);
  EXPECT_LT(st.energy, 0.05 * energy(u0, c.s));
}

TEST(Jko, RunIsMonotoneAndConservative) {
  const JkoConfig c = small_config();
  const GridDensity u0 = gaussian_density(c.grid, at(0.0), 1.0);
  const Trajectory tr = run(u0, c, 8);
  ASSERT_EQ(tr.status, RunStatus::completed);
  ASSERT_EQ(tr.steps.size(), 8u);
  double prev = energy(u0, c.s);
  for (const auto &st : tr.steps) {
    EXPECT_LT(st.energy, prev);
    prev = st.energy;
    EXPECT_LE(std::abs(st.density.mass() - 1.0), 1e-12);
    EXPECT_GE(st.density.min_value(), 0.0);
  }
  EXPECT_TRUE(tr.densities_complete());
  EXPECT_DOUBLE_EQ(tr.horizon(), 8 * c.tau);
}

TEST(Jko, RunIsDeterministic) {
  const JkoConfig c = small_config();
  const GridDensity u0 = gaussian_density(c.grid, at(0.3), 0.7);
  const Trajectory a = run(u0, c, 4), b = run(u0, c, 4);
  for (std::size_t k = 0; k < a.steps.size(); ++k) {
    EXPECT_EQ(a.steps[k].density, b.steps[k].density);
    EXPECT_EQ(a.steps[k].inner_iterations, b.steps[k].inner_iterations);
    EXPECT_EQ(a.steps[k].kkt_residual, b.steps[k].kkt_residual);
  }
}

TEST(Jko, MirrorSymmetryIsPreserved) {
  const JkoConfig c = small_config();
  const GridDensity u0 = gaussian_density(c.grid, at(0.0), 1.0);
  const StepRecord st = jko_step(u0, c);
  const std::size_t n = c.grid.size();
  // Node j sits at -L/2 + j h, so x -> -x maps j to n - j.
  for (std::size_t j = 1; j < n; ++j) EXPECT_NEAR(st.density[j], st.density[n - j], 1e-10);
}

TEST(Jko, StalePotentialReachesSameMinimizer) {
  JkoConfig c = small_config();
  const GridDensity u0 = gaussian_density(c.grid, at(0.0), 1.0);
  const StepRecord exact = jko_step(u0, c);
  c.stale_potential = true;
  const StepRecord stale = jko_step(u0, c);
  EXPECT_NEAR(stale.energy, exact.energy, 1e-9 * exact.energy);
  EXPECT_NEAR(stale.w2_to_prev, exact.w2_to_prev, 1e-6 * exact.w2_to_prev);
}

TEST(Jko, InterpolantConventions) {
  const JkoConfig c = small_config();
  const GridDensity u0 = gaussian_density(c.grid, at(0.0), 1.0);
  const Trajectory tr = run(u0, c, 3);
  const double tau = c.tau;
  EXPECT_EQ(&interpolant(tr, 0.0), &tr.initial);
  EXPECT_EQ(&interpolant(tr, 0.5 * tau), &tr.steps[0].density);
  EXPECT_EQ(&interpolant(tr, tau), &tr.steps[0].density);
  EXPECT_EQ(&interpolant(tr, 1.5 * tau), &tr.steps[1].density);
  EXPECT_EQ(&interpolant(tr, 3.0 * tau), &tr.steps[2].density);
  EXPECT_THROW(interpolant(tr, 3.5 * tau), RangeError);
  EXPECT_THROW(interpolant(tr, -tau), DomainError);
  EXPECT_EQ(&tr.density(0), &tr.initial);
  EXPECT_THROW(tr.density(4), RangeError);
}

TEST(Jko, SolverFailureIsRecorded) {
  JkoConfig c;
  c.grid = PeriodicGrid(2, 16, 8.0);
  c.transport.sinkhorn.max_iter = 1;
  c.transport.sinkhorn.tol = 1e-14;
  const Trajectory tr = run(gaussian_density(c.grid, Point{}, 1.0), c, 3);
  EXPECT_EQ(tr.status, RunStatus::failed);
  EXPECT_TRUE(tr.steps.empty());
  EXPECT_EQ(tr.failure.rfind("step 1: ", 0), 0u) << tr.failure;
}

TEST(Jko, ZeroStepsIsEmptyTrajectory) {
  const JkoConfig c = small_config();
  const Trajectory tr = run(uniform_density(c.grid), c, 0);
  EXPECT_TRUE(tr.steps.empty());
  EXPECT_EQ(tr.status, RunStatus::completed);
  EXPECT_THROW(run(uniform_density(c.grid), c, -1), DomainError);
}
