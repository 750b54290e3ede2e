#pragma once

#include <functional>
#include <string>
#include <utility>

#include "json.hpp"
#include "svtank/state.hpp"

namespace svtank {

/// Named initial-condition families.
///
///  - "equilibrium": h = h*, v = 0
///  - "tilt":        h = h* + amplitude (x - L/2), v = 0
///  - "slosh":       h = h* + amplitude cos(mode pi x / L), v = velocity sin(mode pi x / L)
///  - "offset":      equilibrium liquid
///
/// xi0 and w0 apply to every kind.
struct InitialSpec {
  std::string kind = "slosh";
  int mode = 1;
  double amplitude = 0.0;
  double velocity = 0.0;
  double xi0 = 0.0;
  double w0 = 0.0;

  InitialSpec scaled(double s) const;
};

nlohmann::json to_json(const InitialSpec& spec);
InitialSpec initial_spec_from_json(const nlohmann::json& j);

/// Builds the state. Throws InvalidInput when the level would not stay positive.
std::pair<TankState, LiquidState> make_initial(const InitialSpec& spec, const PhysicalParams& params,
                                               const Grid& grid);

/// Rescales every amplitude of `spec` by a common factor so that
/// measure(state) equals `target` (bisection, 1e-12 relative in the factor).
/// Returns the scaled spec; when the family cannot reach the target while
/// staying positive the largest admissible scale is returned.
InitialSpec scale_to_level(
    const InitialSpec& spec, const PhysicalParams& params, const Grid& grid, double target,
    const std::function<double(const TankState&, const LiquidState&)>& measure);

}  // namespace svtank
