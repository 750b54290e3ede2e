#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "svtank/controller.hpp"
#include "svtank/friction.hpp"
#include "svtank/functionals.hpp"

namespace svtank {

enum class SpillPolicy { Halt, Warn };

struct SolverConfig {
  std::size_t n = 201;
  double t_end = 10.0;
  double cfl_adv = 0.5;
  double cfl_diff = 0.8;
  double output_every = 0.1;
  double h_floor = 1e-9;
  /// Forces f = 0 (uncontrolled tank).
  bool open_loop = false;
  /// Holds f constant over each step instead of re-evaluating it per stage.
  bool sample_and_hold = false;
  SpillPolicy spill = SpillPolicy::Halt;
  /// Fixed step size when > 0 (still clipped at output instants).
  double fixed_dt = 0.0;
  bool record_states = true;

  void validate() const;
};

nlohmann::json to_json(const SolverConfig& c);
SolverConfig solver_config_from_json(const nlohmann::json& j);

struct Derivative {
  double dxi = 0.0;
  double dw = 0.0;
  std::vector<double> dh;
  std::vector<double> dv;
};

/// Time derivative of the closed-loop system for a given control f.
/// Throws SolverFailure when some h_i <= h_floor.
Derivative semidiscrete_rhs(const TankState& tank, const LiquidState& state, double f,
                            const FrictionModel& friction, const PhysicalParams& params,
                            const Grid& grid, double h_floor = 0.0);

/// Explicit step bound from the advective and diffusive limits.
double stable_dt(const LiquidState& state, const PhysicalParams& params, const Grid& grid,
                 const SolverConfig& config);

/// One RK4 step. The feedback law is evaluated at every stage unless the
/// config asks for open loop or sample-and-hold.
std::pair<TankState, LiquidState> step(const TankState& tank, const LiquidState& state,
                                       const FrictionModel& friction, const Gains& gains,
                                       const PhysicalParams& params, const Grid& grid, double dt,
                                       const SolverConfig& config = {});

struct Diagnostics {
  double V = 0.0;
  double U = 0.0;
  double E = 0.0;
  double W = 0.0;
  double mass = 0.0;
  double vx_l2 = 0.0;
  double spill_margin = 0.0;
  double f = 0.0;
  double K_bar = 0.0;
};

Diagnostics diagnose(const TankState& tank, const LiquidState& state, const Gains& gains,
                     const FrictionModel& friction, const PhysicalParams& params, const Grid& grid,
                     bool open_loop);

enum class Termination { Completed, PositivityFailure, NonFinite, Spill };

std::string to_string(Termination t);

struct Trajectory {
  std::vector<double> times;
  std::vector<TankState> tanks;
  std::vector<LiquidState> states;  ///< empty when states are not recorded
  std::vector<Diagnostics> diagnostics;
  Termination termination = Termination::Completed;
  std::string message;
  double t_stop = 0.0;
  std::size_t steps = 0;
  std::vector<std::string> warnings;

  bool completed() const { return termination == Termination::Completed; }
  std::size_t size() const { return times.size(); }
};

Trajectory simulate(const TankState& tank0, const LiquidState& state0, const Gains& gains,
                    const FrictionModel& friction, const PhysicalParams& params,
                    const SolverConfig& config);

}  // namespace svtank
