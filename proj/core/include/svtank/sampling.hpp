#pragma once

#include <cstdint>
#include <random>

#include "svtank/functionals.hpp"

namespace svtank {

/// Shape of the random states drawn from S.
///
/// Level: h = h* + sum_j a_j sin(2 pi j x / L) + b_j cos(2 pi j x / L), with
/// sum |a_j| + |b_j| below `amplitude_fraction * h*` so h stays positive and
/// the mass is exact by construction. Velocity: v = sum_j c_j sin(pi j x / L),
/// which vanishes at both walls.
struct SamplerSpec {
  int modes = 4;
  double amplitude_fraction = 0.9;
  double velocity_scale = 0.5;  ///< [m/s], bound on sum |c_j|
  double tank_scale = 1.0;      ///< xi, w drawn uniformly in [-tank_scale, tank_scale]
};

struct SampledState {
  TankState tank;
  LiquidState state;
};

class StateSampler {
 public:
  StateSampler(PhysicalParams params, Grid grid, SamplerSpec spec = {});

  /// Arbitrary state of S with random amplitude inside the positivity budget.
  SampledState draw(std::mt19937_64& rng) const;

  /// Draws a shape and rescales the deviation from equilibrium so that
  /// V lands on `v_target` (or as close as the positivity budget allows).
  SampledState draw_at_level(std::mt19937_64& rng, const FunctionalParams& fp,
                             double v_target) const;

  const Grid& grid() const { return grid_; }
  const PhysicalParams& params() const { return params_; }

 private:
  struct Shape {
    std::vector<double> dh;
    std::vector<double> v;
    double xi = 0.0;
    double w = 0.0;
  };
  Shape draw_shape(std::mt19937_64& rng, double level_fraction, double vel_fraction) const;
  SampledState realize(const Shape& shape, double scale) const;

  PhysicalParams params_;
  Grid grid_;
  SamplerSpec spec_;
};

/// Independent, reproducible stream for sample `index` under `seed`.
std::mt19937_64 substream(std::uint64_t seed, std::uint64_t index);

}  // namespace svtank
