#pragma once

#include <vector>

#include "svtank/grid.hpp"

namespace svtank {

/// Rigid-body state of the tank: position error xi = a - a* and velocity w.
struct TankState {
  double xi = 0.0;
  double w = 0.0;

  void validate() const;
};

/// Liquid level and tank-frame velocity sampled at the grid nodes.
///
/// Instances are immutable. The checked factory enforces strict positivity,
/// pinned wall velocities, finiteness and the mass constraint; `projected`
/// additionally shifts the level by a constant so that the trapezoid mass is
/// exactly m (the zero-mean part of h is left untouched).
class LiquidState {
 public:
  static constexpr double kDefaultMassRtol = 1e-10;

  static LiquidState make(std::vector<double> h, std::vector<double> v, const Grid& grid,
                          const PhysicalParams& params, double mass_rtol = kDefaultMassRtol);
  static LiquidState projected(std::vector<double> h, std::vector<double> v, const Grid& grid,
                               const PhysicalParams& params);
  /// Skips mass and positivity validation. Used by the integrator, which
  /// checks these itself at every stage.
  static LiquidState trusted(std::vector<double> h, std::vector<double> v);

  static LiquidState equilibrium(const Grid& grid, const PhysicalParams& params);

  const std::vector<double>& h() const { return h_; }
  const std::vector<double>& v() const { return v_; }
  std::size_t size() const { return h_.size(); }

  /// Re-runs the full invariant check against a grid and parameter set.
  void validate(const Grid& grid, const PhysicalParams& params,
                double mass_rtol = kDefaultMassRtol) const;

 private:
  LiquidState(std::vector<double> h, std::vector<double> v) : h_(std::move(h)), v_(std::move(v)) {}

  std::vector<double> h_;
  std::vector<double> v_;
};

/// Lab-frame view: wall position a, level H and absolute velocity u.
struct LabFrameView {
  double a = 0.0;
  double tank_velocity = 0.0;
  std::vector<double> H;
  std::vector<double> u;
};

/// Norm of the shifted state (xi, w, h - h*, v) in R^2 x H^1 x L^2.
double state_norm_X(const TankState& tank, const LiquidState& state, const PhysicalParams& params,
                    const Grid& grid);

LabFrameView to_lab_frame(const TankState& tank, const LiquidState& state, double a_star);

/// Inverse map back to tank coordinates.
std::pair<TankState, LiquidState> from_lab_frame(const LabFrameView& lab, double a_star);

struct SpillCheck {
  bool safe = true;              ///< max(h(0), h(L)) < H_max
  double margin = 0.0;           ///< H_max - max(h(0), h(L))
  bool interior_excess = false;  ///< some interior node at or above H_max
};

SpillCheck spill_check(const LiquidState& state, const PhysicalParams& params);

}  // namespace svtank
