#include "svtank/sampling.hpp"

#include <cmath>
#include <numbers>

#include "svtank/error.hpp"

namespace svtank {

std::mt19937_64 substream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

StateSampler::StateSampler(PhysicalParams params, Grid grid, SamplerSpec spec)
    : params_(params), grid_(grid), spec_(spec) {
  params_.validate();
  detail::require(spec_.modes >= 1, "sampler needs at least one mode");
  detail::require(spec_.amplitude_fraction > 0.0 && spec_.amplitude_fraction < 1.0,
                  "amplitude_fraction must lie in (0, 1)");
}

StateSampler::Shape StateSampler::draw_shape(std::mt19937_64& rng, double level_fraction,
                                             double vel_fraction) const {
  using std::numbers::pi;
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const int J = spec_.modes;
  std::vector<double> a(J), b(J), c(J);
  double sum_ab = 0.0, sum_c = 0.0;
  for (int j = 0; j < J; ++j) {
    a[j] = unit(rng) / (j + 1);
    b[j] = unit(rng) / (j + 1);
    c[j] = unit(rng) / (j + 1);
    sum_ab += std::abs(a[j]) + std::abs(b[j]);
    sum_c += std::abs(c[j]);
  }
  const double hs = params_.h_star();
  const double level_budget = level_fraction * spec_.amplitude_fraction * hs;
  const double vel_budget = vel_fraction * spec_.velocity_scale;
  const double sa = sum_ab > 0.0 ? level_budget / sum_ab : 0.0;
  const double sc = sum_c > 0.0 ? vel_budget / sum_c : 0.0;

  Shape s;
  const std::size_t n = grid_.n();
  const double L = grid_.L();
  s.dh.assign(n, 0.0);
  s.v.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = grid_.x(i);
    for (int j = 0; j < J; ++j) {
      const double kx = 2.0 * pi * (j + 1) * x / L;
      s.dh[i] += sa * (a[j] * std::sin(kx) + b[j] * std::cos(kx));
      s.v[i] += sc * c[j] * std::sin(pi * (j + 1) * x / L);
    }
  }
  s.v.front() = 0.0;
  s.v.back() = 0.0;
  s.xi = spec_.tank_scale * unit(rng);
  s.w = spec_.tank_scale * unit(rng);
  return s;
}

SampledState StateSampler::realize(const Shape& shape, double scale) const {
  const double hs = params_.h_star();
  std::vector<double> h(shape.dh.size()), v(shape.v.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    h[i] = hs + scale * shape.dh[i];
    v[i] = scale * shape.v[i];
  }
  return {TankState{scale * shape.xi, scale * shape.w},
          LiquidState::projected(std::move(h), std::move(v), grid_, params_)};
}

SampledState StateSampler::draw(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double lf = u01(rng);
  const double vf = u01(rng);
  return realize(draw_shape(rng, lf, vf), 1.0);
}

SampledState StateSampler::draw_at_level(std::mt19937_64& rng, const FunctionalParams& fp,
                                         double v_target) const {
  detail::require(v_target >= 0.0, "target level must be >= 0");
  const Shape shape = draw_shape(rng, 1.0, 1.0);
  auto V_at = [&](double s) {
    const auto st = realize(shape, s);
    return clf_V(st.tank, st.state, params_, fp, grid_);
  };
  if (v_target == 0.0) return realize(shape, 0.0);
  double lo = 0.0, hi = 1.0;
  if (V_at(hi) <= v_target) return realize(shape, hi);
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    (V_at(mid) <= v_target ? lo : hi) = mid;
  }
  return realize(shape, lo);
}

}  // namespace svtank
