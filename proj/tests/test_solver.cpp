#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "svtank/error.hpp"
#include "svtank/initial.hpp"
#include "svtank/sampling.hpp"
#include "svtank/solver.hpp"

using namespace svtank;

namespace {

constexpr double kPi = std::numbers::pi;

double max_abs(const std::vector<double>& a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

LiquidState slosh(const Grid& grid, const PhysicalParams& p, double a, double c, int mode = 1) {
  return make_initial({"slosh", mode, a, c, 0.0, 0.0}, p, grid).second;
}

}  // namespace

class SolverTest : public ::testing::Test {
 protected:
  PhysicalParams params;
  Gains gains;
};

TEST_F(SolverTest, EquilibriumIsFixedPointOfRhs) {
  Grid grid(101, params.L);
  const auto eq = LiquidState::equilibrium(grid, params);
  for (const FrictionModel& m : {FrictionModel{friction::Frictionless{}},
                                 FrictionModel{friction::VelocityIndependent{0.05, params.mu}},
                                 FrictionModel{friction::ConstAbsV{0.3}}}) {
    const auto d = semidiscrete_rhs({}, eq, 0.0, m, params, grid);
    EXPECT_EQ(d.dxi, 0.0);
    EXPECT_EQ(d.dw, 0.0);
    EXPECT_EQ(max_abs(d.dh), 0.0);
    EXPECT_EQ(max_abs(d.dv), 0.0);
  }
}

TEST_F(SolverTest, UniformForcing) {
  Grid grid(64, params.L);
  const auto eq = LiquidState::equilibrium(grid, params);
  const double f0 = 0.37;
  const auto d = semidiscrete_rhs({0.2, 0.3}, eq, f0, friction::Frictionless{}, params, grid);
  EXPECT_EQ(d.dxi, 0.3);
  EXPECT_EQ(d.dw, -f0);
  EXPECT_EQ(max_abs(d.dh), 0.0);
  EXPECT_EQ(d.dv.front(), 0.0);
  EXPECT_EQ(d.dv.back(), 0.0);
  for (std::size_t i = 1; i + 1 < grid.n(); ++i) EXPECT_EQ(d.dv[i], f0);
}

TEST_F(SolverTest, ManufacturedResidualIsSecondOrder) {
  // Smooth fields with the right wall behaviour; exact continuum time
  // derivatives computed by hand.
  const double hs = params.h_star(), eps = 0.05, a = 0.2, mu = params.mu, g = params.g;
  const friction::VelocityIndependent fr{0.05, mu};
  auto exact = [&](double x, double& dh, double& dv) {
    const double h = hs + eps * std::cos(kPi * x), hx = -eps * kPi * std::sin(kPi * x);
    const double v = a * std::sin(kPi * x), vx = a * kPi * std::cos(kPi * x),
                 vxx = -a * kPi * kPi * std::sin(kPi * x);
    dh = -(hx * v + h * vx);
    dv = -v * vx - g * hx + mu * (hx * vx + h * vxx) / h - kappa(fr, h, v) * v / h;
  };
  double prev_h = 0, prev_v = 0;
  for (std::size_t n : {41u, 81u, 161u, 321u}) {
    Grid grid(n, 1.0);
    std::vector<double> h(n), v(n);
    for (std::size_t i = 0; i < n; ++i) {
      h[i] = hs + eps * std::cos(kPi * grid.x(i));
      v[i] = a * std::sin(kPi * grid.x(i));
    }
    v.front() = v.back() = 0.0;
    const auto d = semidiscrete_rhs({}, LiquidState::trusted(h, v), 0.0, fr, params, grid);
    double eh = 0, ev = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double dh, dv;
      exact(grid.x(i), dh, dv);
      eh = std::max(eh, std::abs(d.dh[i] - dh));
      if (i > 0 && i + 1 < n) ev = std::max(ev, std::abs(d.dv[i] - dv));
    }
    if (prev_h > 0) {
      EXPECT_NEAR(prev_h / eh, 4.0, 0.5) << "n=" << n;
      EXPECT_NEAR(prev_v / ev, 4.0, 0.5) << "n=" << n;
    }
    prev_h = eh;
    prev_v = ev;
  }
}

TEST_F(SolverTest, StableDtFormula) {
  Grid grid(101, params.L);
  SolverConfig cfg;
  const auto eq = LiquidState::equilibrium(grid, params);
  const double dx = grid.dx();
  const double expected = std::min(cfg.cfl_adv * dx / std::sqrt(params.g * params.h_star()),
                                   cfg.cfl_diff * dx * dx / (2 * params.mu));
  EXPECT_DOUBLE_EQ(stable_dt(eq, params, grid, cfg), expected);

  // Diffusion-limited regime: doubling mu halves dt, halving dx quarters it.
  PhysicalParams viscous = params;
  viscous.mu = 2.0;
  const double d1 = stable_dt(eq, viscous, grid, cfg);
  viscous.mu = 4.0;
  EXPECT_NEAR(stable_dt(eq, viscous, grid, cfg), d1 / 2, 1e-15);
  Grid fine(201, params.L);
  viscous.mu = 2.0;
  EXPECT_LE(stable_dt(LiquidState::equilibrium(fine, viscous), viscous, fine, cfg), d1 / 4 * (1 + 1e-12));
  // Advective regime: halving dx at least halves dt.
  PhysicalParams thin = params;
  thin.mu = 1e-4;
  EXPECT_LE(stable_dt(LiquidState::equilibrium(fine, thin), thin, fine, cfg),
            stable_dt(LiquidState::equilibrium(grid, thin), thin, grid, cfg) / 2 * (1 + 1e-12));
}

TEST_F(SolverTest, StepConservesMassOnRandomStates) {
  Grid grid(151, params.L);
  StateSampler sampler(params, grid, {4, 0.5, 0.3, 1.0});
  SolverConfig cfg;
  cfg.n = 151;
  const friction::VelocityIndependent fr{0.05, params.mu};
  for (std::uint64_t i = 0; i < 20; ++i) {
    auto rng = substream(77, i);
    const auto s = sampler.draw(rng);
    const double m0 = trapezoid_integral(s.state.h(), grid);
    const double dt = stable_dt(s.state, params, grid, cfg);
    const auto [tk, st] = step(s.tank, s.state, fr, gains, params, grid, dt, cfg);
    EXPECT_LE(std::abs(trapezoid_integral(st.h(), grid) - m0), 1e-13 * m0);
    EXPECT_EQ(st.v().front(), 0.0);
    EXPECT_EQ(st.v().back(), 0.0);
  }
}

TEST_F(SolverTest, PositivityAndNonFiniteSignals) {
  Grid grid(32, params.L);
  std::vector<double> h(32, params.h_star()), v(32, 0.0);
  h[5] = 1e-12;
  EXPECT_THROW(semidiscrete_rhs({}, LiquidState::trusted(h, v), 0.0, friction::Frictionless{}, params,
                                grid, 1e-9),
               SolverFailure);
  h[5] = params.h_star();
  v[4] = std::nan("");
  EXPECT_THROW(semidiscrete_rhs({}, LiquidState::trusted(h, v), 0.0, friction::Frictionless{}, params, grid),
               SolverFailure);
}

TEST_F(SolverTest, EquilibriumTrajectoryIsFlat) {
  SolverConfig cfg;
  cfg.n = 64;
  cfg.t_end = 1.0;
  Grid grid(cfg.n, params.L);
  const auto traj = simulate({}, LiquidState::equilibrium(grid, params), gains,
                             friction::VelocityIndependent{0.05, params.mu}, params, cfg);
  ASSERT_TRUE(traj.completed());
  for (const auto& d : traj.diagnostics) {
    EXPECT_EQ(d.V, 0.0);
    EXPECT_EQ(d.f, 0.0);
  }
}

TEST_F(SolverTest, OutputInstantsAndRecomputableDiagnostics) {
  SolverConfig cfg;
  cfg.n = 81;
  cfg.t_end = 0.35;
  cfg.output_every = 0.1;
  Grid grid(cfg.n, params.L);
  const friction::VelocityIndependent fr{0.05, params.mu};
  const auto traj = simulate({0.1, 0.0}, slosh(grid, params, 0.02, 0.05), gains, fr, params, cfg);
  ASSERT_TRUE(traj.completed());
  ASSERT_EQ(traj.size(), 5u);
  EXPECT_DOUBLE_EQ(traj.times[3], 0.30000000000000004);
  EXPECT_EQ(traj.times.back(), 0.35);
  for (std::size_t k = 1; k < traj.size(); ++k) EXPECT_GT(traj.times[k], traj.times[k - 1]);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const auto d = diagnose(traj.tanks[k], traj.states[k], gains, fr, params, grid, false);
    EXPECT_EQ(d.V, traj.diagnostics[k].V);
    EXPECT_EQ(d.U, traj.diagnostics[k].U);
    EXPECT_EQ(d.f, traj.diagnostics[k].f);
    EXPECT_EQ(d.mass, traj.diagnostics[k].mass);
  }
}

TEST_F(SolverTest, OpenLoopEnergyDissipates) {
  SolverConfig cfg;
  cfg.n = 101;
  cfg.t_end = 3.0;
  cfg.output_every = 0.01;
  cfg.open_loop = true;
  Grid grid(cfg.n, params.L);
  const auto traj =
      simulate({0.3, 0.1}, slosh(grid, params, 0.05, 0.1), gains, friction::Frictionless{}, params, cfg);
  ASSERT_TRUE(traj.completed());
  for (std::size_t k = 1; k < traj.size(); ++k) {
    EXPECT_LE(traj.diagnostics[k].E, traj.diagnostics[k - 1].E * (1 + 1e-10)) << "t=" << traj.times[k];
    EXPECT_EQ(traj.diagnostics[k].f, 0.0);
  }
  EXPECT_LT(traj.diagnostics.back().E, 0.5 * traj.diagnostics.front().E);
  // Uncontrolled tank coasts.
  EXPECT_NEAR(traj.tanks.back().xi, 0.3 + 0.1 * 3.0, 1e-12);
}

TEST_F(SolverTest, ReflectionSymmetry) {
  SolverConfig cfg;
  cfg.n = 101;
  cfg.t_end = 0.5;
  cfg.output_every = 0.1;
  Grid grid(cfg.n, params.L);
  const auto s0 = make_initial({"slosh", 2, 0.03, 0.05, 0.0, 0.0}, params, grid).second;
  std::vector<double> tilt(cfg.n);
  for (std::size_t i = 0; i < cfg.n; ++i) tilt[i] = s0.h()[i] + 0.02 * (grid.x(i) - 0.5);
  const auto a = LiquidState::projected(tilt, s0.v(), grid, params);
  std::vector<double> ht(a.h().rbegin(), a.h().rend()), vt(a.v().rbegin(), a.v().rend());
  for (double& x : vt) x = -x;
  const auto b = LiquidState::projected(ht, vt, grid, params);

  const friction::VelocityIndependent fr{0.05, params.mu};
  const auto ta = simulate({0.2, -0.1}, a, gains, fr, params, cfg);
  const auto tb = simulate({-0.2, 0.1}, b, gains, fr, params, cfg);
  ASSERT_TRUE(ta.completed() && tb.completed());
  ASSERT_EQ(ta.size(), tb.size());
  for (std::size_t k = 0; k < ta.size(); ++k) {
    EXPECT_NEAR(ta.tanks[k].xi, -tb.tanks[k].xi, 1e-11);
    EXPECT_NEAR(ta.tanks[k].w, -tb.tanks[k].w, 1e-11);
    EXPECT_NEAR(ta.diagnostics[k].f, -tb.diagnostics[k].f, 1e-11);
    const std::size_t n = cfg.n;
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_NEAR(ta.states[k].h()[i], tb.states[k].h()[n - 1 - i], 1e-11);
      EXPECT_NEAR(ta.states[k].v()[i], -tb.states[k].v()[n - 1 - i], 1e-11);
    }
  }
}

TEST_F(SolverTest, GridConvergenceIsSecondOrder) {
  // Terminal level against a fine reference on nested grids.
  SolverConfig cfg;
  cfg.t_end = 0.1;
  cfg.output_every = 0.1;
  cfg.open_loop = true;
  auto run = [&](std::size_t n) {
    cfg.n = n;
    Grid grid(n, params.L);
    const auto t = simulate({}, slosh(grid, params, 0.05, 0.1), gains, friction::Frictionless{}, params, cfg);
    EXPECT_TRUE(t.completed());
    return t.states.back();
  };
  const auto ref = run(641);
  double prev = 0;
  for (std::size_t n : {41u, 81u, 161u}) {
    const auto s = run(n);
    const std::size_t stride = 640 / (n - 1);
    double err = 0;
    for (std::size_t i = 0; i < n; ++i) {
      err = std::max(err, std::abs(s.h()[i] - ref.h()[i * stride]));
      err = std::max(err, std::abs(s.v()[i] - ref.v()[i * stride]));
    }
    if (prev > 0) EXPECT_NEAR(prev / err, 4.0, 1.0) << "n=" << n;
    prev = err;
  }
}

TEST_F(SolverTest, EarlyTerminationIsAResult) {
  SolverConfig cfg;
  cfg.n = 64;
  cfg.t_end = 1.0;
  cfg.h_floor = 0.47;
  Grid grid(cfg.n, params.L);
  auto traj = simulate({}, slosh(grid, params, 0.0, 0.5), gains, friction::Frictionless{}, params, cfg);
  EXPECT_EQ(traj.termination, Termination::PositivityFailure);
  EXPECT_FALSE(traj.message.empty());

  PhysicalParams low = params;
  low.H_max = 0.52;
  cfg.h_floor = 1e-9;
  traj = simulate({}, slosh(grid, low, 0.0, 0.5), gains, friction::Frictionless{}, low, cfg);
  EXPECT_EQ(traj.termination, Termination::Spill);
  cfg.spill = SpillPolicy::Warn;
  cfg.t_end = 0.3;
  traj = simulate({}, slosh(grid, low, 0.0, 0.5), gains, friction::Frictionless{}, low, cfg);
  EXPECT_TRUE(traj.completed());
  EXPECT_FALSE(traj.warnings.empty());
}

TEST_F(SolverTest, InitialFamilies) {
  Grid grid(401, params.L);
  const auto [tk, eq] = make_initial({"offset", 1, 0, 0, 0.0, 0.0}, params, grid);
  EXPECT_EQ(tk.xi, 0.0);
  EXPECT_EQ(eq.h(), LiquidState::equilibrium(grid, params).h());
  const auto tl = make_initial({"tilt", 1, 0.2, 0, 0.0, 0.0}, params, grid).second;
  EXPECT_NEAR(trapezoid_integral(tl.h(), grid), params.m, 1e-15);
  EXPECT_THROW(make_initial({"tilt", 1, 5.0, 0, 0, 0}, params, grid), InvalidInput);

  // V(0) of the 10% mode-1 slosh: closed form for E and the tank terms, the
  // mu^2/2 int h_x^2 / h part of W by fine quadrature.
  const double hs = params.h_star(), a = 0.1 * hs, c = 0.05;
  const auto s = slosh(grid, params, a, c);
  FunctionalParams fp;
  const double V = clf_V({}, s, params, fp, grid);
  const std::size_t nf = 400000;
  double kin = 0, pot = 0, W = 0;
  for (std::size_t i = 0; i < nf; ++i) {
    const double x = (i + 0.5) / nf;
    const double h = hs + a * std::cos(kPi * x), hx = -a * kPi * std::sin(kPi * x);
    const double v = c * std::sin(kPi * x);
    kin += 0.5 * h * v * v / nf;
    pot += 0.5 * params.g * (h - hs) * (h - hs) / nf;
    W += 0.5 * std::pow(h * v + params.mu * hx, 2) / h / nf;
  }
  const double ref = fp.delta * (kin + pot) + W + pot;
  EXPECT_NEAR(V, ref, 1e-6 * ref);
}
