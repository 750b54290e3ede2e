#include "svtank/state.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "svtank/error.hpp"

namespace svtank {

using detail::require;

void TankState::validate() const {
  require(std::isfinite(xi) && std::isfinite(w), "tank state must be finite");
}

namespace {

void check_shape(const std::vector<double>& h, const std::vector<double>& v, const Grid& grid) {
  require(h.size() == grid.n(), "level sample count does not match grid");
  require(v.size() == grid.n(), "velocity sample count does not match grid");
}

void check_pointwise(const std::vector<double>& h, const std::vector<double>& v) {
  for (std::size_t i = 0; i < h.size(); ++i) {
    require(std::isfinite(h[i]) && std::isfinite(v[i]),
            "non-finite entry at node " + std::to_string(i));
    require(h[i] > 0.0, "level must be strictly positive (node " + std::to_string(i) + ")");
  }
  require(v.front() == 0.0 && v.back() == 0.0, "wall velocities must be exactly zero");
}

}  // namespace

LiquidState LiquidState::make(std::vector<double> h, std::vector<double> v, const Grid& grid,
                              const PhysicalParams& params, double mass_rtol) {
  LiquidState s(std::move(h), std::move(v));
  s.validate(grid, params, mass_rtol);
  return s;
}

LiquidState LiquidState::projected(std::vector<double> h, std::vector<double> v, const Grid& grid,
                                   const PhysicalParams& params) {
  check_shape(h, v, grid);
  const double mass = trapezoid_integral(h, grid);
  const double shift = (params.m - mass) / grid.L();
  for (double& hi : h) hi += shift;
  check_pointwise(h, v);
  return LiquidState(std::move(h), std::move(v));
}

LiquidState LiquidState::trusted(std::vector<double> h, std::vector<double> v) {
  return LiquidState(std::move(h), std::move(v));
}

LiquidState LiquidState::equilibrium(const Grid& grid, const PhysicalParams& params) {
  return LiquidState(std::vector<double>(grid.n(), params.h_star()),
                     std::vector<double>(grid.n(), 0.0));
}

void LiquidState::validate(const Grid& grid, const PhysicalParams& params,
                           double mass_rtol) const {
  check_shape(h_, v_, grid);
  check_pointwise(h_, v_);
  const double mass = trapezoid_integral(h_, grid);
  require(std::abs(mass - params.m) <= mass_rtol * params.m,
          "mass constraint violated: integral of h = " + std::to_string(mass) +
              ", expected m = " + std::to_string(params.m));
}

double state_norm_X(const TankState& tank, const LiquidState& state, const PhysicalParams& params,
                    const Grid& grid) {
  tank.validate();
  require(state.size() == grid.n(), "state_norm_X: state does not match grid");
  const auto& h = state.h();
  const double hs = params.h_star();
  std::vector<double> dev(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) dev[i] = h[i] - hs;
  const auto hx = central_derivative(h, grid);
  const double sq = tank.xi * tank.xi + tank.w * tank.w + l2_norm_sq(dev, grid) +
                    l2_norm_sq(hx, grid) + l2_norm_sq(state.v(), grid);
  return std::sqrt(sq);
}

LabFrameView to_lab_frame(const TankState& tank, const LiquidState& state, double a_star) {
  tank.validate();
  LabFrameView lab;
  lab.a = tank.xi + a_star;
  lab.tank_velocity = tank.w;
  lab.H = state.h();
  lab.u.resize(state.size());
  const auto& v = state.v();
  for (std::size_t i = 0; i < v.size(); ++i) lab.u[i] = v[i] + tank.w;
  return lab;
}

std::pair<TankState, LiquidState> from_lab_frame(const LabFrameView& lab, double a_star) {
  require(lab.H.size() == lab.u.size(), "lab frame: level and velocity sizes differ");
  TankState tank{lab.a - a_star, lab.tank_velocity};
  std::vector<double> v(lab.u.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = lab.u[i] - lab.tank_velocity;
  return {tank, LiquidState::trusted(lab.H, std::move(v))};
}

SpillCheck spill_check(const LiquidState& state, const PhysicalParams& params) {
  const auto& h = state.h();
  const double wall = std::max(h.front(), h.back());
  SpillCheck out;
  out.margin = params.H_max - wall;
  out.safe = wall < params.H_max;
  out.interior_excess = std::any_of(h.begin(), h.end(), [&](double x) { return x >= params.H_max; });
  return out;
}

}  // namespace svtank
