#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "svtank/controller.hpp"
#include "svtank/error.hpp"
#include "svtank/sampling.hpp"

using namespace svtank;

namespace {

LiquidState tilt(double a, const Grid& grid, const PhysicalParams& p) {
  std::vector<double> h(grid.n());
  for (std::size_t i = 0; i < grid.n(); ++i) h[i] = p.h_star() + a * (grid.x(i) - p.L / 2);
  return LiquidState::make(h, std::vector<double>(grid.n(), 0.0), grid, p);
}

// Valid (r, k) for a gain set: half the spill radius and half the k ceiling.
Gains corollary_gains(double delta, const PhysicalParams& p, double& r) {
  Gains g;
  g.delta = delta;
  r = 0.5 * radius_R(p, g.functional());
  g.k = 0.5 * g.q * theta(r, p, g.functional(), g.sigma);
  return g;
}

}  // namespace

class ControllerTest : public ::testing::Test {
 protected:
  PhysicalParams params;
  Grid grid{201, 1.0};
};

TEST_F(ControllerTest, FeedbackExamples) {
  Gains g{1.7, 0.04, 1.3, 2.0, 1.0, 1.0};
  const auto eq = LiquidState::equilibrium(grid, params);
  EXPECT_EQ(feedback_f({}, eq, g, params, grid), 0.0);
  EXPECT_NEAR(feedback_f({0.8, 0.0}, eq, g, params, grid), g.sigma * g.q * g.k * 0.8, 1e-15);
  const double a = 0.2;
  EXPECT_NEAR(feedback_f({}, tilt(a, grid, params), g, params, grid), -g.sigma * params.mu * a * params.L,
              1e-14);
}

TEST_F(ControllerTest, FeedbackIsLinearInMeasurements) {
  Gains g{1.7, 0.04, 1.3, 2.0, 1.0, 1.0};
  StateSampler sampler(params, grid);
  for (std::uint64_t i = 0; i < 30; ++i) {
    auto rng = substream(9, i);
    const auto s = sampler.draw(rng);
    const double M = trapezoid_integral(
        [&] {
          std::vector<double> hv(grid.n());
          for (std::size_t j = 0; j < grid.n(); ++j) hv[j] = s.state.h()[j] * s.state.v()[j];
          return hv;
        }(),
        grid);
    const double D = s.state.h().back() - s.state.h().front();
    const double Z = s.tank.w + g.k * s.tank.xi;
    const double expected = -g.sigma * (g.delta + 1) * M - g.sigma * params.mu * D + g.sigma * g.q * Z;
    EXPECT_NEAR(feedback_f(s.tank, s.state, g, params, grid), expected, 1e-14);

    // Superposition over the measured quantities.
    const double f1 = feedback_from_measurements(M, 0, 0, 0, g, params.mu);
    const double f2 = feedback_from_measurements(0, D, 0, 0, g, params.mu);
    const double f3 = feedback_from_measurements(0, 0, s.tank.w, s.tank.xi, g, params.mu);
    EXPECT_NEAR(f1 + f2 + f3, expected, 1e-14);
  }
}

TEST_F(ControllerTest, CorollaryHoldsAcrossDecadesOfDelta) {
  for (double delta : {0.1, 1.0, 10.0}) {
    double r = 0;
    const Gains g = corollary_gains(delta, params, r);
    const double omega = level_bounds_p(r, params, g.functional()).p1;
    const auto rep = check_theorem1(g, omega, r, friction::Frictionless{}, params);
    EXPECT_TRUE(rep.pass) << "delta=" << delta;
    EXPECT_EQ(rep.theorem, Certificate::Corollary1);
  }
}

TEST_F(ControllerTest, PositionGainAtCeilingFailsWithZeroMargin) {
  double r = 0;
  Gains g = corollary_gains(1.0, params, r);
  g.k = g.q * theta(r, params, g.functional(), g.sigma);
  const double omega = level_bounds_p(r, params, g.functional()).p1;
  const auto rep = check_theorem1(g, omega, r, friction::Frictionless{}, params);
  EXPECT_FALSE(rep.pass);
  const Check* c = rep.find("position_gain");
  ASSERT_NE(c, nullptr);
  EXPECT_FALSE(c->pass);
  EXPECT_EQ(c->margin, 0.0);
}

TEST_F(ControllerTest, FrictionDominanceAtFiftyPercent) {
  // Strong friction so that the required delta is positive.
  const double c = 1.0, omega = 0.05;
  const friction::VelocityIndependent vi{c, params.mu};
  const double K = *assumption_H_bound(vi, omega, params);
  Gains g;
  g.delta = 1.5 * params.mu * K / (2 * params.g) - 1.0;
  ASSERT_GT(g.delta, 0.0);
  const double r = 0.0;
  g.k = 0.5 * g.q * theta(r, params, g.functional(), g.sigma);
  const auto rep = check_theorem1(g, omega, r, vi, params);
  const Check* fd = rep.find("friction_dominance");
  ASSERT_NE(fd, nullptr);
  EXPECT_TRUE(fd->pass);
  EXPECT_NEAR(fd->margin, 0.5, 1e-12);
  EXPECT_TRUE(rep.pass);
}

TEST_F(ControllerTest, UnboundedFrictionFailsAssumptionH) {
  double r = 0;
  const Gains g = corollary_gains(1.0, params, r);
  const auto rep = check_theorem1(g, 0.25, r, friction::ConstAbsV{0.1}, params);
  EXPECT_FALSE(rep.pass);
  const Check* h = rep.find("assumption_H");
  ASSERT_NE(h, nullptr);
  EXPECT_EQ(h->note, "Assumption (H) not satisfied");
  const auto s = suggest_gains_theorem1(0.25, friction::ConstAbsV{0.1}, params);
  EXPECT_FALSE(s.feasible);
  EXPECT_NE(s.reason.find("Assumption (H) not satisfied"), std::string::npos);
}

TEST_F(ControllerTest, RadiusAndLevelFloorChecks) {
  double r = 0;
  const Gains g = corollary_gains(1.0, params, r);
  const double R = radius_R(params, g.functional());
  EXPECT_FALSE(check_theorem1(g, 0.1, R, friction::Frictionless{}, params).pass);
  EXPECT_FALSE(check_theorem1(g, 0.1, -1e-3, friction::Frictionless{}, params).pass);
  const double p1 = level_bounds_p(r, params, g.functional()).p1;
  EXPECT_FALSE(check_theorem1(g, std::min(params.h_star(), p1 * 1.01), r, friction::Frictionless{},
                              params)
                   .pass);
}

TEST_F(ControllerTest, TheoremTwoVelocityCapBoundary) {
  const friction::VelocityIndependent vi{0.05, params.mu};
  const auto s = suggest_gains_theorem2(0.25, 0.1, vi, params);
  ASSERT_TRUE(s.feasible) << s.reason;
  const double cap = std::sqrt(2 * params.L * u_level(s.r, s.gains.functional()) / 3);
  const auto rep = check_theorem2(s.gains, 0.25, cap, s.r, vi, params);
  const Check* c = rep.find("velocity_cap");
  ASSERT_NE(c, nullptr);
  EXPECT_FALSE(c->pass);
  EXPECT_EQ(c->margin, 0.0);
  EXPECT_FALSE(rep.pass);
}

TEST_F(ControllerTest, TheoremTwoFrictionlessDominanceTrivial) {
  Gains g;
  g.delta = 1e-3;
  const auto rep = check_theorem2(g, 0.25, 0.1, 0.0, friction::Frictionless{}, params);
  const Check* c = rep.find("friction_dominance");
  ASSERT_NE(c, nullptr);
  EXPECT_TRUE(c->pass);
}

TEST_F(ControllerTest, SuggestTightestLevelIsConsistent) {
  const auto s = suggest_gains_theorem1(params.h_star(), friction::Frictionless{}, params);
  const auto rep = check_theorem1(s.gains, params.h_star(), s.r, friction::Frictionless{}, params);
  EXPECT_EQ(rep.pass, s.report.pass);
  if (s.feasible) EXPECT_EQ(s.r, 0.0);
}

TEST_F(ControllerTest, SuggestRoundTripOnRandomParameters) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int t2_tested = 0;
  for (int trial = 0; trial < 50; ++trial) {
    PhysicalParams p;
    p.g = 9.81 * (0.5 + u(rng));
    p.mu = 0.02 + 0.3 * u(rng);
    p.L = 0.3 + 2.0 * u(rng);
    p.H_max = 0.2 + 1.5 * u(rng);
    p.m = p.L * p.H_max * (0.1 + 0.7 * u(rng));
    const double hs = p.h_star();
    const double omega = hs * (0.2 + 0.6 * u(rng));
    FrictionModel model;
    switch (trial % 3) {
      case 0: model = friction::Frictionless{}; break;
      case 1: model = friction::VelocityIndependent{0.01 + 0.2 * u(rng), p.mu}; break;
      default: model = make_bounded_tanh(0.001 + 0.05 * u(rng), 0.1); break;
    }
    const auto s = suggest_gains_theorem1(omega, model, p);
    ASSERT_TRUE(s.feasible) << "trial " << trial << ": " << s.reason;
    const auto rep = check_theorem1(s.gains, omega, s.r, model, p);
    EXPECT_TRUE(rep.pass) << "trial " << trial;
    for (const auto& c : rep.checks)
      if (c.strict && c.name != "spill_radius") EXPECT_GE(c.margin, 0.0) << c.name;
    const double K = *assumption_H_bound(model, omega, p);
    const auto rates = decay_rates(s.gains, s.r, p, K);
    EXPECT_GT(rates.lambda_V, 0.0);
    EXPECT_GT(rates.lambda_U, 0.0);

    const double w2 = 0.05 + 0.5 * u(rng);
    const auto s2 = suggest_gains_theorem2(omega, w2, model, p);
    if (s2.feasible) {
      ++t2_tested;
      EXPECT_TRUE(check_theorem2(s2.gains, omega, w2, s2.r, model, p).pass);
      const Check* gl = s2.report.find("gamma_lower_bound");
      ASSERT_NE(gl, nullptr);
      EXPECT_NEAR(gl->margin, 0.25, 1e-9);
    }
  }
  EXPECT_GT(t2_tested, 25);
}

TEST_F(ControllerTest, RateVanishesAsPositionGainApproachesCeiling) {
  double r = 0;
  Gains g = corollary_gains(1.0, params, r);
  const double ceiling = g.q * theta(r, params, g.functional(), g.sigma);
  auto rate_at = [&](double frac) {
    g.k = frac * ceiling;
    const auto [beta, gamma] = select_beta_gamma(g, r, 0.0, params, 0.25);
    g.beta = beta;
    g.gamma = gamma;
    return decay_rates(g, r, params, 0.0).lambda_V;
  };
  // Far from the ceiling the q k^3 term limits the rate; the q (q theta - k)
  // term takes over close to it.
  const double base = rate_at(0.9);
  double prev = 1e300;
  for (double frac : {0.9999, 0.99999, 0.999999, 0.9999999}) {
    const double lv = rate_at(frac);
    EXPECT_LT(lv, prev);
    prev = lv;
  }
  EXPECT_LT(prev, 1e-2 * base);
}

TEST_F(ControllerTest, ReportJsonShape) {
  const auto s = suggest_gains_theorem1(0.25, friction::Frictionless{}, params);
  const auto j = to_json(s.report);
  for (const char* key : {"theorem", "pass", "r", "R", "checks", "gains"}) EXPECT_TRUE(j.contains(key)) << key;
  for (const auto& c : j["checks"])
    for (const char* key : {"name", "lhs", "rhs", "margin", "pass"}) EXPECT_TRUE(c.contains(key));
  EXPECT_EQ(gains_from_json(to_json(s.gains)).k, s.gains.k);
}
