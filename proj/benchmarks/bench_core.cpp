#include <benchmark/benchmark.h>

#include "svtank/initial.hpp"
#include "svtank/solver.hpp"

using namespace svtank;

namespace {

const PhysicalParams kParams{};

std::pair<TankState, LiquidState> slosh(const Grid& grid) {
  return make_initial({"slosh", 1, 0.02, 0.05, 0.1, 0.0}, kParams, grid);
}

void BM_Rhs(benchmark::State& st) {
  const Grid grid(static_cast<std::size_t>(st.range(0)), kParams.L);
  const auto [tank, state] = slosh(grid);
  const friction::VelocityIndependent fr{0.05, kParams.mu};
  for (auto _ : st) benchmark::DoNotOptimize(semidiscrete_rhs(tank, state, 0.01, fr, kParams, grid));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}
BENCHMARK(BM_Rhs)->Arg(101)->Arg(201)->Arg(401);

void BM_Step(benchmark::State& st) {
  const Grid grid(static_cast<std::size_t>(st.range(0)), kParams.L);
  auto [tank, state] = slosh(grid);
  const friction::VelocityIndependent fr{0.05, kParams.mu};
  SolverConfig cfg;
  cfg.n = grid.n();
  const double dt = stable_dt(state, kParams, grid, cfg);
  const Gains gains;
  for (auto _ : st) {
    auto next = step(tank, state, fr, gains, kParams, grid, dt, cfg);
    benchmark::DoNotOptimize(next);
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}
BENCHMARK(BM_Step)->Arg(101)->Arg(201)->Arg(401);

void BM_GInverse(benchmark::State& st) {
  double y = -0.3;
  for (auto _ : st) {
    benchmark::DoNotOptimize(G_inverse(y, kParams));
    y = y > 0.3 ? -0.3 : y + 1e-3;
  }
}
BENCHMARK(BM_GInverse);

void BM_Functionals(benchmark::State& st) {
  const Grid grid(static_cast<std::size_t>(st.range(0)), kParams.L);
  const auto [tank, state] = slosh(grid);
  const FunctionalParams fp;
  for (auto _ : st) benchmark::DoNotOptimize(functional_U(tank, state, kParams, fp, grid));
}
BENCHMARK(BM_Functionals)->Arg(201)->Arg(401);

void BM_LevelBounds(benchmark::State& st) {
  const FunctionalParams fp;
  double s = 0.0;
  for (auto _ : st) {
    benchmark::DoNotOptimize(level_bounds_p(s, kParams, fp));
    s = s > 1e-3 ? 0.0 : s + 1e-6;
  }
}
BENCHMARK(BM_LevelBounds);

}  // namespace

BENCHMARK_MAIN();
