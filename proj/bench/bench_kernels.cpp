// OpenMP kernels against their serial references. Argument: points per axis.

#include <cmath>
#include <vector>

#include <benchmark/benchmark.h>

#include "thinfilm/density.hpp"
#include "thinfilm/kernels.hpp"

using namespace thinfilm;

namespace {

PeriodicGrid grid_2d(benchmark::State &state) { return PeriodicGrid(2, static_cast<int>(state.range(0)), 12.0); }

std::vector<double> log_density(const PeriodicGrid &g) {
  const GridDensity u = gaussian_density(g, Point{}, 1.0);
  std::vector<double> out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = std::log(u[i]);
  return out;
}

template <bool Parallel> void bm_logsumexp(benchmark::State &state) {
  const PeriodicGrid g = grid_2d(state);
  const auto in = log_density(g);
  std::vector<double> out(g.size());
  for (auto _ : state) {
    if constexpr (Parallel)
      kernels::separable_logsumexp(g, in, 0.025, out);
    else
      kernels::reference::separable_logsumexp(g, in, 0.025, out);
    benchmark::DoNotOptimize(out.data());
  }
}

VectorFieldSpec swirl() {
  Point dir{};
  dir[0] = 1.0;
  dir[1] = 0.5;
  return plateau_field(2, dir, SmoothCutoff(1.0, 4.0));
}

template <bool Parallel> void bm_backward_flow(benchmark::State &state) {
  const PeriodicGrid g = grid_2d(state);
  const auto eta = swirl();
  for (auto _ : state) {
    auto f = Parallel ? kernels::backward_flow(g, eta, 0.1) : kernels::reference::backward_flow(g, eta, 0.1);
    benchmark::DoNotOptimize(f.det.data());
  }
}

template <bool Parallel> void bm_interpolate(benchmark::State &state) {
  const PeriodicGrid g = grid_2d(state);
  const GridDensity u = gaussian_density(g, Point{}, 1.0);
  const auto flow = kernels::backward_flow(g, swirl(), 0.1);
  for (auto _ : state) {
    auto v = Parallel ? kernels::interpolate(g, u.values(), flow.origin, flow.moved, Interpolation::cubic)
                      : kernels::reference::interpolate(g, u.values(), flow.origin, flow.moved, Interpolation::cubic);
    benchmark::DoNotOptimize(v.data());
  }
}

} // namespace

BENCHMARK(bm_logsumexp<true>)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_logsumexp<false>)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_backward_flow<true>)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_backward_flow<false>)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_interpolate<true>)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_interpolate<false>)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
