#include "svtank/initial.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "svtank/error.hpp"

namespace svtank {

using detail::require;

InitialSpec InitialSpec::scaled(double s) const {
  InitialSpec out = *this;
  out.amplitude *= s;
  out.velocity *= s;
  out.xi0 *= s;
  out.w0 *= s;
  return out;
}

nlohmann::json to_json(const InitialSpec& s) {
  return {{"kind", s.kind},         {"mode", s.mode}, {"amplitude", s.amplitude},
          {"velocity", s.velocity}, {"xi0", s.xi0},   {"w0", s.w0}};
}

InitialSpec initial_spec_from_json(const nlohmann::json& j) {
  InitialSpec s;
  s.kind = j.value("kind", s.kind);
  s.mode = j.value("mode", s.mode);
  s.amplitude = j.value("amplitude", s.amplitude);
  s.velocity = j.value("velocity", s.velocity);
  s.xi0 = j.value("xi0", s.xi0);
  s.w0 = j.value("w0", s.w0);
  require(s.kind == "equilibrium" || s.kind == "tilt" || s.kind == "slosh" || s.kind == "offset",
          "initial.kind must be one of equilibrium, tilt, slosh, offset");
  require(s.mode >= 1, "initial.mode must be >= 1");
  return s;
}

std::pair<TankState, LiquidState> make_initial(const InitialSpec& spec, const PhysicalParams& params,
                                               const Grid& grid) {
  using std::numbers::pi;
  params.validate();
  const double hs = params.h_star();
  const double L = grid.L();
  const std::size_t n = grid.n();
  std::vector<double> h(n, hs), v(n, 0.0);
  if (spec.kind == "tilt") {
    for (std::size_t i = 0; i < n; ++i) h[i] = hs + spec.amplitude * (grid.x(i) - 0.5 * L);
  } else if (spec.kind == "slosh") {
    for (std::size_t i = 0; i < n; ++i) {
      const double arg = spec.mode * pi * grid.x(i) / L;
      h[i] = hs + spec.amplitude * std::cos(arg);
      v[i] = spec.velocity * std::sin(arg);
    }
    v.front() = 0.0;
    v.back() = 0.0;
  } else {
    require(spec.kind == "equilibrium" || spec.kind == "offset",
            "unknown initial kind \"" + spec.kind + "\"");
  }
  TankState tank{spec.xi0, spec.w0};
  tank.validate();
  // Both families have zero trapezoid mean in exact arithmetic; the
  // projection only removes roundoff.
  if (spec.kind == "equilibrium" || spec.kind == "offset")
    return {tank, LiquidState::equilibrium(grid, params)};
  return {tank, LiquidState::projected(std::move(h), std::move(v), grid, params)};
}

InitialSpec scale_to_level(
    const InitialSpec& spec, const PhysicalParams& params, const Grid& grid, double target,
    const std::function<double(const TankState&, const LiquidState&)>& measure) {
  require(target >= 0.0, "target level must be >= 0");
  auto positive = [&](double s) {
    try {
      make_initial(spec.scaled(s), params, grid);
      return true;
    } catch (const InvalidInput&) {
      return false;
    }
  };
  auto value = [&](double s) {
    const auto [tank, state] = make_initial(spec.scaled(s), params, grid);
    return measure(tank, state);
  };
  if (target == 0.0) return spec.scaled(0.0);
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200 && positive(hi) && value(hi) < target; ++it) {
    lo = hi;
    hi *= 2.0;
  }
  if (positive(hi) && value(hi) < target) return spec.scaled(hi);
  for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (positive(mid) && value(mid) <= target ? lo : hi) = mid;
  }
  return spec.scaled(lo);
}

}  // namespace svtank
