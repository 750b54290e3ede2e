#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>

#include "json.hpp"
#include "svtank/grid.hpp"
#include "svtank/state.hpp"

namespace svtank {

namespace friction {

struct Frictionless {};

/// kappa = c_f |v|
struct ConstAbsV {
  double c_f = 0.0;
};

/// kappa = r0 + r1 h |v|
struct LinearLevel {
  double r0 = 0.0;
  double r1 = 0.0;
};

/// kappa = r h^{-1/3} (b + 2h)^{4/3} |v|, b the channel width
struct ChannelWidth {
  double r = 0.0;
  double b = 1.0;
};

/// kappa = 3 mu c / (3 mu + 4 c h); mu is the liquid viscosity
struct VelocityIndependent {
  double c = 0.0;
  double mu = 0.0;
};

/// User relation with a global bound kappa(h, v) <= B for all h > 0 and all v.
/// The bound is taken on trust; `kappa` must honour it.
struct BoundedGeneric {
  double B = 0.0;
  std::function<double(double h, double v)> kappa;
  std::string label = "custom";
};

}  // namespace friction

using FrictionModel =
    std::variant<friction::Frictionless, friction::ConstAbsV, friction::LinearLevel,
                 friction::ChannelWidth, friction::VelocityIndependent, friction::BoundedGeneric>;

/// Checks parameter signs. Throws InvalidInput.
void validate(const FrictionModel& model);

std::string friction_name(const FrictionModel& model);

/// Friction coefficient at level h > 0 and relative velocity v.
double kappa(const FrictionModel& model, double h, double v);

/// K(omega) of the velocity-independent bound h^{-2} kappa <= K(omega) on
/// [omega, H_max] x R. Empty when the model grows without bound in |v|.
std::optional<double> assumption_H_bound(const FrictionModel& model, double omega,
                                         const PhysicalParams& params);

/// max of h^{-2} kappa(h, v) over omega1 <= h <= H_max, |v| <= omega2.
double K_tilde(const FrictionModel& model, double omega1, double omega2,
               const PhysicalParams& params);

/// max over nodes of h_i^{-2} kappa(h_i, v_i).
double K_bar(const FrictionModel& model, const LiquidState& state);

/// Bounded relation with a smooth saturating profile B tanh(|v| / v_scale).
friction::BoundedGeneric make_bounded_tanh(double B, double v_scale);

/// Bounded relation kappa = B.
friction::BoundedGeneric make_bounded_constant(double B);

/// Parses {"type": "none" | "const_abs_v" | "linear_level" | "channel_width" |
/// "velocity_independent" | "bounded", ...}. The viscosity for the
/// velocity-independent relation comes from `params`.
FrictionModel friction_from_json(const nlohmann::json& j, const PhysicalParams& params);
nlohmann::json to_json(const FrictionModel& model);

}  // namespace svtank
