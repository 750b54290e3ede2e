#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "svtank/error.hpp"
#include "svtank/friction.hpp"
#include "svtank/sampling.hpp"

using namespace svtank;

namespace {

// Brute-force max of h^-2 kappa over [h_lo, h_hi] x [-v_cap, v_cap].
double grid_max(const FrictionModel& model, double h_lo, double h_hi, double v_cap, int n = 801) {
  double best = 0.0;
  for (int i = 0; i < n; ++i) {
    const double h = h_lo + (h_hi - h_lo) * i / (n - 1);
    for (int j = 0; j < n; ++j) {
      const double v = -v_cap + 2 * v_cap * j / (n - 1);
      best = std::max(best, kappa(model, h, v) / (h * h));
    }
  }
  return best;
}

std::vector<FrictionModel> all_models(const PhysicalParams& p) {
  return {friction::Frictionless{},       friction::ConstAbsV{0.02},
          friction::LinearLevel{0.01, 0.3}, friction::ChannelWidth{0.004, 0.5},
          friction::VelocityIndependent{0.05, p.mu}, make_bounded_tanh(0.01, 0.1),
          make_bounded_constant(0.02)};
}

}  // namespace

class FrictionTest : public ::testing::Test {
 protected:
  PhysicalParams params;
};

TEST_F(FrictionTest, PointValues) {
  EXPECT_EQ(kappa(friction::Frictionless{}, 0.3, 5.0), 0.0);
  const friction::VelocityIndependent vi{0.05, params.mu};
  EXPECT_DOUBLE_EQ(kappa(vi, 0.4, 1.0), 3 * params.mu * 0.05 / (3 * params.mu + 4 * 0.05 * 0.4));
  EXPECT_NEAR(kappa(vi, 1e-12, 0.0), 0.05, 1e-12);
  const friction::ConstAbsV ca{0.3};
  EXPECT_EQ(kappa(ca, 0.5, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(kappa(ca, 0.5, 2.0), 0.6);
  EXPECT_DOUBLE_EQ(kappa(ca, 0.5, -2.0), 0.6);
  EXPECT_DOUBLE_EQ(kappa(friction::LinearLevel{0.1, 2.0}, 0.5, -3.0), 0.1 + 2.0 * 0.5 * 3.0);
  EXPECT_DOUBLE_EQ(kappa(friction::ChannelWidth{0.2, 1.0}, 0.125, 1.5),
                   0.2 * std::pow(0.125, -1.0 / 3.0) * std::pow(1.25, 4.0 / 3.0) * 1.5);
  EXPECT_THROW(kappa(vi, 0.0, 1.0), InvalidInput);
}

TEST_F(FrictionTest, NonNegativeEverywhere) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> uh(1e-6, 2.0), uv(-50.0, 50.0);
  for (const auto& m : all_models(params))
    for (int i = 0; i < 2000; ++i) EXPECT_GE(kappa(m, uh(rng), uv(rng)), 0.0);
}

TEST_F(FrictionTest, ValidationRejectsBadParameters) {
  EXPECT_THROW(validate(friction::ConstAbsV{-1.0}), InvalidInput);
  EXPECT_THROW(validate(friction::ChannelWidth{0.1, 0.0}), InvalidInput);
  EXPECT_THROW(validate(friction::VelocityIndependent{0.0, 0.1}), InvalidInput);
  EXPECT_THROW(validate(friction::BoundedGeneric{1.0, nullptr, "x"}), InvalidInput);
}

TEST_F(FrictionTest, AssumptionHBounds) {
  EXPECT_EQ(assumption_H_bound(friction::Frictionless{}, 0.3, params), 0.0);
  const double c = 0.05, w = 0.25, mu = params.mu;
  const auto K = assumption_H_bound(friction::VelocityIndependent{c, mu}, w, params);
  ASSERT_TRUE(K);
  EXPECT_DOUBLE_EQ(*K, 3 * mu * c / (w * w * (3 * mu + 4 * c * w)));
  EXPECT_DOUBLE_EQ(*assumption_H_bound(make_bounded_constant(0.02), w, params), 0.02 / (w * w));
  EXPECT_FALSE(assumption_H_bound(friction::ConstAbsV{0.1}, w, params));
  EXPECT_FALSE(assumption_H_bound(friction::LinearLevel{0.1, 0.1}, w, params));
  EXPECT_FALSE(assumption_H_bound(friction::ChannelWidth{0.1, 1.0}, w, params));
  EXPECT_THROW(assumption_H_bound(friction::Frictionless{}, 0.6, params), InvalidInput);
}

TEST_F(FrictionTest, AssumptionHBoundDominatesGrid) {
  const std::vector<FrictionModel> models{friction::VelocityIndependent{0.05, params.mu},
                                          make_bounded_tanh(0.01, 0.1), make_bounded_constant(0.02),
                                          friction::LinearLevel{0.01, 0.0}};
  for (const auto& m : models) {
    double prev = 1e300;
    for (double w : {0.05, 0.1, 0.25, 0.4, 0.5}) {
      const double K = *assumption_H_bound(m, w, params);
      EXPECT_LE(grid_max(m, w, params.H_max, 10.0, 201), K * (1 + 1e-12)) << friction_name(m);
      EXPECT_LE(K, prev);
      prev = K;
    }
  }
}

TEST_F(FrictionTest, KTildeMatchesGridOracle) {
  const double w1 = 0.2, w2 = 0.3;
  EXPECT_EQ(K_tilde(friction::Frictionless{}, w1, w2, params), 0.0);
  EXPECT_DOUBLE_EQ(K_tilde(friction::ConstAbsV{0.4}, w1, w2, params), 0.4 * w2 / (w1 * w1));
  for (const auto& m : all_models(params)) {
    const double kt = K_tilde(m, w1, w2, params);
    const double oracle = grid_max(m, w1, params.H_max, w2);
    EXPECT_GE(kt, oracle * (1 - 1e-12)) << friction_name(m);
    EXPECT_NEAR(kt, oracle, 1e-3 * std::max(oracle, 1e-12)) << friction_name(m);
  }
}

TEST_F(FrictionTest, KTildeFindsInteriorMaxOfGenericRelation) {
  // Peak at h = 0.6, |v| = 0.21, away from the box corner.
  friction::BoundedGeneric bump{
      1.0,
      [](double h, double v) {
        return h * h * std::exp(-std::pow((h - 0.6) / 0.05, 2) - std::pow((std::abs(v) - 0.21) / 0.03, 2));
      },
      "bump"};
  const double kt = K_tilde(bump, 0.2, 0.4, params);
  EXPECT_NEAR(kt, 1.0, 1e-9);
  EXPECT_GE(kt, grid_max(bump, 0.2, params.H_max, 0.4, 1201) * (1 - 1e-12));
}

TEST_F(FrictionTest, KBarIsNodewiseMax) {
  Grid grid(121, params.L);
  StateSampler sampler(params, grid);
  EXPECT_EQ(K_bar(friction::Frictionless{}, LiquidState::equilibrium(grid, params)), 0.0);
  EXPECT_EQ(K_bar(friction::ConstAbsV{0.5}, LiquidState::equilibrium(grid, params)), 0.0);
  for (const auto& m : all_models(params)) {
    for (std::uint64_t s = 0; s < 20; ++s) {
      auto rng = substream(5, s);
      const auto st = sampler.draw(rng).state;
      double best = 0.0;
      for (std::size_t i = 0; i < grid.n(); ++i) {
        const double h = st.h()[i];
        best = std::max(best, kappa(m, h, st.v()[i]) / (h * h));
      }
      EXPECT_EQ(K_bar(m, st), best);

      const auto [lo, hi] = std::minmax_element(st.h().begin(), st.h().end());
      double vmax = 0.0;
      for (double v : st.v()) vmax = std::max(vmax, std::abs(v));
      if (*lo < params.h_star() && vmax > 0.0 && *hi <= params.H_max) {
        EXPECT_LE(K_bar(m, st), K_tilde(m, *lo, vmax, params) * (1 + 1e-9)) << friction_name(m);
      }
    }
  }
}

TEST_F(FrictionTest, JsonRoundTrip) {
  using nlohmann::json;
  for (const auto& j : {json{{"type", "none"}}, json{{"type", "const_abs_v"}, {"c_f", 0.1}},
                        json{{"type", "linear_level"}, {"r0", 0.1}, {"r1", 0.2}},
                        json{{"type", "channel_width"}, {"r", 0.1}, {"b", 0.5}},
                        json{{"type", "velocity_independent"}, {"c", 0.05}},
                        json{{"type", "bounded"}, {"B", 0.02}, {"profile", "constant"}}}) {
    const auto m = friction_from_json(j, params);
    const auto back = friction_from_json(to_json(m), params);
    EXPECT_EQ(friction_name(m), friction_name(back));
    EXPECT_EQ(kappa(m, 0.37, 0.21), kappa(back, 0.37, 0.21));
  }
  EXPECT_THROW(friction_from_json({{"type", "quadratic"}}, params), InvalidInput);
  EXPECT_THROW(friction_from_json({{"type", "const_abs_v"}}, params), InvalidInput);
}
