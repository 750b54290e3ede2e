#include "svtank/solver.hpp"

#include <algorithm>
#include <cmath>

#include "svtank/error.hpp"

namespace svtank {

using detail::require;

void SolverConfig::validate() const {
  require(n >= 16, "solver.n must be >= 16");
  require(std::isfinite(t_end) && t_end >= 0.0, "solver.t_end must be >= 0");
  require(cfl_adv > 0.0 && cfl_adv <= 1.0, "solver.cfl_adv must lie in (0, 1]");
  require(cfl_diff > 0.0 && cfl_diff <= 1.0, "solver.cfl_diff must lie in (0, 1]");
  require(std::isfinite(output_every) && output_every > 0.0, "solver.output_every must be > 0");
  require(h_floor >= 0.0, "solver.h_floor must be >= 0");
  require(fixed_dt >= 0.0, "solver.fixed_dt must be >= 0");
}

nlohmann::json to_json(const SolverConfig& c) {
  return {{"n", c.n},
          {"t_end", c.t_end},
          {"cfl_adv", c.cfl_adv},
          {"cfl_diff", c.cfl_diff},
          {"output_every", c.output_every},
          {"h_floor", c.h_floor},
          {"open_loop", c.open_loop},
          {"sample_and_hold", c.sample_and_hold},
          {"spill", c.spill == SpillPolicy::Halt ? "halt" : "warn"},
          {"fixed_dt", c.fixed_dt},
          {"record_states", c.record_states}};
}

SolverConfig solver_config_from_json(const nlohmann::json& j) {
  SolverConfig c;
  c.n = j.value("n", c.n);
  c.t_end = j.value("t_end", c.t_end);
  c.cfl_adv = j.value("cfl_adv", c.cfl_adv);
  c.cfl_diff = j.value("cfl_diff", c.cfl_diff);
  c.output_every = j.value("output_every", c.output_every);
  c.h_floor = j.value("h_floor", c.h_floor);
  c.open_loop = j.value("open_loop", c.open_loop);
  c.sample_and_hold = j.value("sample_and_hold", c.sample_and_hold);
  c.fixed_dt = j.value("fixed_dt", c.fixed_dt);
  c.record_states = j.value("record_states", c.record_states);
  const std::string spill = j.value("spill", std::string("halt"));
  if (spill == "halt") {
    c.spill = SpillPolicy::Halt;
  } else if (spill == "warn") {
    c.spill = SpillPolicy::Warn;
  } else {
    throw InvalidInput("solver.spill must be \"halt\" or \"warn\"");
  }
  c.validate();
  return c;
}

namespace {

struct NonFiniteState : SolverFailure {
  using SolverFailure::SolverFailure;
};
struct PositivityLoss : SolverFailure {
  using SolverFailure::SolverFailure;
};

// Evaluates the semi-discrete vector field on raw buffers. Owns scratch space
// so the integrator does not allocate per stage.
class VectorField {
 public:
  VectorField(const FrictionModel& friction, const PhysicalParams& params, const Grid& grid,
              double h_floor)
      : friction_(friction), params_(params), grid_(grid), h_floor_(h_floor),
        hv_(grid.n()), flux_(grid.n() - 1) {}

  double momentum(const std::vector<double>& h, const std::vector<double>& v) {
    for (std::size_t i = 0; i < h.size(); ++i) hv_[i] = h[i] * v[i];
    return trapezoid_integral(hv_, grid_);
  }

  void operator()(double w, const std::vector<double>& h, const std::vector<double>& v, double f,
                  double& dxi, double& dw, std::vector<double>& dh, std::vector<double>& dv) {
    const std::size_t n = grid_.n();
    const double dx = grid_.dx();
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(h[i]) || !std::isfinite(v[i]))
        throw NonFiniteState("non-finite value at node " + std::to_string(i));
      if (h[i] <= h_floor_)
        throw PositivityLoss("level dropped to " + std::to_string(h[i]) + " at node " +
                             std::to_string(i));
      hv_[i] = h[i] * v[i];
    }
    if (!std::isfinite(f) || !std::isfinite(w)) throw NonFiniteState("non-finite tank state or control");
    dxi = w;
    dw = -f;

    // Continuity in flux form. Wall faces carry zero flux, so the trapezoid
    // mass telescopes exactly. Face j sits between nodes j and j + 1. The
    // first and last faces use a one-sided flux that keeps the half-cell
    // wall nodes second-order accurate; the rest use a four-point flux whose
    // differences are second-order consistent with it.
    flux_[0] = (4.0 * hv_[1] - hv_[2]) / 4.0;
    flux_[n - 2] = (4.0 * hv_[n - 2] - hv_[n - 3]) / 4.0;
    for (std::size_t j = 1; j + 2 < n; ++j)
      flux_[j] = (-hv_[j - 1] + 5.0 * hv_[j] + 5.0 * hv_[j + 1] - hv_[j + 2]) / 8.0;
    dh[0] = -2.0 * flux_[0] / dx;
    dh[n - 1] = 2.0 * flux_[n - 2] / dx;
    for (std::size_t i = 1; i + 1 < n; ++i) dh[i] = -(flux_[i] - flux_[i - 1]) / dx;

    // Momentum in velocity form at interior nodes; the wall velocities stay 0.
    const double inv2dx = 0.5 / dx;
    const double invdx2 = 1.0 / (dx * dx);
    const double g = params_.g;
    const double mu = params_.mu;
    dv[0] = 0.0;
    dv[n - 1] = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double vx = (v[i + 1] - v[i - 1]) * inv2dx;
      const double hx = (h[i + 1] - h[i - 1]) * inv2dx;
      const double h_right = 0.5 * (h[i] + h[i + 1]);
      const double h_left = 0.5 * (h[i - 1] + h[i]);
      const double visc = (h_right * (v[i + 1] - v[i]) - h_left * (v[i] - v[i - 1])) * invdx2;
      const double fr = kappa(friction_, h[i], v[i]) * v[i];
      dv[i] = -v[i] * vx - g * hx + (mu * visc - fr) / h[i] + f;
    }
  }

 private:
  const FrictionModel& friction_;
  const PhysicalParams& params_;
  const Grid& grid_;
  double h_floor_;
  std::vector<double> hv_;
  std::vector<double> flux_;
};

class Integrator {
 public:
  Integrator(const FrictionModel& friction, const Gains& gains, const PhysicalParams& params,
             const Grid& grid, const SolverConfig& config)
      : field_(friction, params, grid, config.h_floor), gains_(gains), params_(params),
        grid_(grid), config_(config) {
    const std::size_t n = grid.n();
    for (auto* b : {&h_stage_, &v_stage_, &acc_h_, &acc_v_, &kh_, &kv_}) b->assign(n, 0.0);
  }

  double control(double xi, double w, const std::vector<double>& h, const std::vector<double>& v) {
    if (config_.open_loop) return 0.0;
    return feedback_from_measurements(field_.momentum(h, v), h.back() - h.front(), w, xi, gains_,
                                      params_.mu);
  }

  // Advances (xi, w, h, v) in place by dt.
  void advance(double& xi, double& w, std::vector<double>& h, std::vector<double>& v, double dt) {
    const std::size_t n = h.size();
    const double held = config_.sample_and_hold ? control(xi, w, h, v) : 0.0;
    static constexpr double kStage[4] = {0.0, 0.5, 0.5, 1.0};
    static constexpr double kWeight[4] = {1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0};
    double acc_xi = 0.0, acc_w = 0.0;
    std::fill(acc_h_.begin(), acc_h_.end(), 0.0);
    std::fill(acc_v_.begin(), acc_v_.end(), 0.0);
    double kxi = 0.0, kw = 0.0;
    for (int s = 0; s < 4; ++s) {
      const double c = kStage[s] * dt;
      const double xs = xi + c * kxi;
      const double ws = w + c * kw;
      for (std::size_t i = 0; i < n; ++i) {
        h_stage_[i] = h[i] + c * kh_[i];
        v_stage_[i] = v[i] + c * kv_[i];
      }
      const double f = config_.sample_and_hold ? held : control(xs, ws, h_stage_, v_stage_);
      field_(ws, h_stage_, v_stage_, f, kxi, kw, kh_, kv_);
      acc_xi += kWeight[s] * kxi;
      acc_w += kWeight[s] * kw;
      for (std::size_t i = 0; i < n; ++i) {
        acc_h_[i] += kWeight[s] * kh_[i];
        acc_v_[i] += kWeight[s] * kv_[i];
      }
    }
    xi += dt * acc_xi;
    w += dt * acc_w;
    for (std::size_t i = 0; i < n; ++i) {
      h[i] += dt * acc_h_[i];
      v[i] += dt * acc_v_[i];
    }
    v.front() = 0.0;
    v.back() = 0.0;
    // Clear the stage slopes so the next call starts from k = 0.
    std::fill(kh_.begin(), kh_.end(), 0.0);
    std::fill(kv_.begin(), kv_.end(), 0.0);
  }

 private:
  VectorField field_;
  const Gains& gains_;
  const PhysicalParams& params_;
  const Grid& grid_;
  const SolverConfig& config_;
  std::vector<double> h_stage_, v_stage_, acc_h_, acc_v_, kh_, kv_;
};

double raw_stable_dt(const std::vector<double>& h, const std::vector<double>& v,
                     const PhysicalParams& params, const Grid& grid, const SolverConfig& config) {
  double speed = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i)
    speed = std::max(speed, std::abs(v[i]) + std::sqrt(params.g * std::max(h[i], 0.0)));
  const double dx = grid.dx();
  const double diff = config.cfl_diff * dx * dx / (2.0 * params.mu);
  if (speed == 0.0) return diff;
  return std::min(config.cfl_adv * dx / speed, diff);
}

}  // namespace

Derivative semidiscrete_rhs(const TankState& tank, const LiquidState& state, double f,
                            const FrictionModel& friction, const PhysicalParams& params,
                            const Grid& grid, double h_floor) {
  require(state.size() == grid.n(), "semidiscrete_rhs: state does not match grid");
  Derivative d;
  d.dh.resize(grid.n());
  d.dv.resize(grid.n());
  VectorField field(friction, params, grid, h_floor);
  field(tank.w, state.h(), state.v(), f, d.dxi, d.dw, d.dh, d.dv);
  return d;
}

double stable_dt(const LiquidState& state, const PhysicalParams& params, const Grid& grid,
                 const SolverConfig& config) {
  require(state.size() == grid.n(), "stable_dt: state does not match grid");
  return raw_stable_dt(state.h(), state.v(), params, grid, config);
}

std::pair<TankState, LiquidState> step(const TankState& tank, const LiquidState& state,
                                       const FrictionModel& friction, const Gains& gains,
                                       const PhysicalParams& params, const Grid& grid, double dt,
                                       const SolverConfig& config) {
  require(state.size() == grid.n(), "step: state does not match grid");
  require(dt > 0.0 && std::isfinite(dt), "step: dt must be > 0");
  Integrator integ(friction, gains, params, grid, config);
  double xi = tank.xi, w = tank.w;
  std::vector<double> h = state.h(), v = state.v();
  integ.advance(xi, w, h, v, dt);
  return {TankState{xi, w}, LiquidState::trusted(std::move(h), std::move(v))};
}

Diagnostics diagnose(const TankState& tank, const LiquidState& state, const Gains& gains,
                     const FrictionModel& friction, const PhysicalParams& params, const Grid& grid,
                     bool open_loop) {
  const auto fp = gains.functional();
  Diagnostics d;
  d.E = energy_E(state, params, grid);
  d.W = energy_W(state, params, grid);
  const double z = tank.w + fp.k * tank.xi;
  d.V = fp.delta * d.E + d.W + 0.5 * fp.q * fp.k * fp.k * tank.xi * tank.xi + 0.5 * fp.q * z * z;
  const double vx_sq = vx_l2_sq(state, grid);
  d.vx_l2 = std::sqrt(vx_sq);
  d.U = functional_U_from(d.V, vx_sq, fp);
  d.mass = trapezoid_integral(state.h(), grid);
  d.spill_margin = spill_check(state, params).margin;
  d.f = open_loop ? 0.0 : feedback_f(tank, state, gains, params, grid);
  d.K_bar = K_bar(friction, state);
  return d;
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::Completed:
      return "completed";
    case Termination::PositivityFailure:
      return "positivity_failure";
    case Termination::NonFinite:
      return "non_finite";
    case Termination::Spill:
      return "spill";
  }
  return "unknown";
}

Trajectory simulate(const TankState& tank0, const LiquidState& state0, const Gains& gains,
                    const FrictionModel& friction, const PhysicalParams& params,
                    const SolverConfig& config) {
  config.validate();
  params.validate();
  gains.validate();
  validate(friction);
  const Grid grid(config.n, params.L);
  require(state0.size() == grid.n(), "initial state does not match solver.n");
  tank0.validate();

  Trajectory traj;
  double xi = tank0.xi, w = tank0.w;
  std::vector<double> h = state0.h(), v = state0.v();
  bool warned_interior = false, warned_spill = false;

  auto record = [&](double t) {
    const auto st = LiquidState::trusted(h, v);
    const TankState tk{xi, w};
    traj.times.push_back(t);
    traj.tanks.push_back(tk);
    traj.diagnostics.push_back(diagnose(tk, st, gains, friction, params, grid, config.open_loop));
    const auto sc = spill_check(st, params);
    if (sc.interior_excess && !warned_interior) {
      traj.warnings.push_back("interior level reached H_max at t = " + std::to_string(t));
      warned_interior = true;
    }
    if (config.record_states) traj.states.push_back(st);
    return sc.safe;
  };

  auto spill_event = [&](double t) {
    const std::string msg = "wall level reached H_max at t = " + std::to_string(t);
    if (config.spill == SpillPolicy::Halt) {
      traj.termination = Termination::Spill;
      traj.message = msg;
      return true;
    }
    if (!warned_spill) traj.warnings.push_back(msg);
    warned_spill = true;
    return false;
  };

  traj.t_stop = 0.0;
  if (!record(0.0) && spill_event(0.0)) return traj;

  Integrator integ(friction, gains, params, grid, config);
  const auto n_out = static_cast<std::size_t>(std::ceil(config.t_end / config.output_every - 1e-9));
  double t = 0.0;
  try {
    for (std::size_t k = 1; k <= n_out; ++k) {
      const double t_next = std::min(config.t_end, static_cast<double>(k) * config.output_every);
      while (t < t_next) {
        double dt = config.fixed_dt > 0.0 ? config.fixed_dt
                                           : raw_stable_dt(h, v, params, grid, config);
        // Take the remaining gap in one step if it is at most a step and a
        // bit, otherwise split what is left evenly to avoid a sliver step.
        const double gap = t_next - t;
        if (gap <= dt * (1.0 + 1e-12)) {
          dt = gap;
        } else if (gap < 2.0 * dt) {
          dt = 0.5 * gap;
        }
        integ.advance(xi, w, h, v, dt);
        ++traj.steps;
        t = (dt == gap) ? t_next : t + dt;
        traj.t_stop = t;
        const double wall = std::max(h.front(), h.back());
        if (!(wall < params.H_max) && spill_event(t)) {
          record(t);
          return traj;
        }
      }
      record(t_next);
    }
  } catch (const PositivityLoss& e) {
    traj.termination = Termination::PositivityFailure;
    traj.message = e.what();
  } catch (const NonFiniteState& e) {
    traj.termination = Termination::NonFinite;
    traj.message = e.what();
  }
  return traj;
}

}  // namespace svtank
