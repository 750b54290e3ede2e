// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "svtank/experiment.hpp"
#include "svtank/trajectory_io.hpp"

using namespace svtank;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const VerificationResult* find(const std::vector<VerificationResult>& rs, const std::string& name) {
  for (const auto& r : rs)
    if (r.name == name) return &r;
  return nullptr;
}

ExperimentConfig load(const char* name) {
  return experiment_from_json(load_config_file(std::string(SVTANK_CONFIG_DIR) + "/" + name));
}

RunOptions quiet() {
  RunOptions o;
  o.write_files = false;
  return o;
}

double mass_drift(const Trajectory& t) {
  return trajectory_summary(t)["max_mass_drift"].get<double>();
}

// Worst end-to-end relative mass drift over every trajectory simulated here.
double g_mass_drift = 0.0;
int g_trajectories = 0;
void note_mass(double drift) {
  g_mass_drift = std::max(g_mass_drift, drift);
  ++g_trajectories;
}

const PhysicalParams kParams{};
const Grid kGrid{201, kParams.L};

Outcome level_bounds() {
  const auto r = verify_lemma1(1000, 42, kParams, FunctionalParams{}, kGrid, 1);
  return {r.pass && r.samples == 1000 && r.worst_margin >= 0.0,
          fmt("%zu samples, worst margin %.3g", r.samples, r.worst_margin)};
}

Outcome sup_and_poincare() {
  const auto r = verify_prop1(1000, 42, kParams.L, 1);
  const double gap = r.details["eigenmode_relative_gap"].get<double>();
  return {r.pass && gap <= 1e-10,
          fmt("%zu samples, worst margin %.3g, eigenmode gap %.2g", r.samples, r.worst_margin, gap)};
}

Outcome quadratic_upper_bound() {
  const auto r = verify_prop2(1000, 42, kParams, FunctionalParams{}, kGrid, 1);
  return {r.pass && r.samples == 1000, fmt("%zu samples, worst margin %.3g", r.samples, r.worst_margin)};
}

Outcome sandwich() {
  const auto r = verify_sandwich(1000, 42, kParams, FunctionalParams{}, 1.0, kGrid, 1);
  return {r.pass, fmt("%zu states below R, worst margin %.3g", r.samples, r.worst_margin)};
}

Outcome energy_balance() {
  const auto cfg = load("energy_balance.toml");
  const auto out = run_experiment(cfg, quiet());
  const auto* conv = find(out.results, "energy_balance_convergence");
  const auto* coarse = find(out.results, "energy_balance");
  if (!conv || !coarse || !out.trajectory) return {false, "missing energy-balance results"};
  note_mass(mass_drift(*out.trajectory));
  note_mass(conv->details["fine_max_mass_drift"].get<double>());
  const double rE = conv->details["ratio_E"].get<double>();
  const double rW = conv->details["ratio_W"].get<double>();
  return {conv->pass && coarse->pass && out.exit_code == kExitOk,
          fmt("n = %zu vs %zu, error ratios dE %.3f, dW %.3f", cfg.solver.n, 2 * (cfg.solver.n - 1) + 1,
              rE, rW)};
}

Outcome certified_run(const char* config, const char* functional) {
  const auto cfg = load(config);
  const auto out = run_experiment(cfg, quiet());
  const auto* decay = find(out.results, "decay");
  if (!decay || !out.trajectory || !out.report) return {false, "run produced no decay result"};
  note_mass(mass_drift(*out.trajectory));
  const auto& c = decay->details["clauses"];
  std::string extra;
  if (c.contains("rate_V") && !c["rate_V"]["fitted"].is_null())
    extra = fmt(", fitted V rate %.3g >= 0.95 x %.3g", c["rate_V"]["fitted"].get<double>(),
                c["rate_V"]["certified"].get<double>());
  if (c.contains("velocity_cap"))
    extra += fmt(", max|v| %.3g <= cap %.3g", c["velocity_cap"]["max_abs_v"].get<double>(),
                 c["velocity_cap"]["cap"].get<double>());
  return {out.report->pass && decay->pass && out.exit_code == kExitOk,
          fmt("%s, r = %.3g, %s uptick %.2g, min spill margin %.3g", to_string(out.report->theorem).c_str(),
              out.report->r, functional, c["nonincreasing"]["max_relative_uptick"].get<double>(),
              c["spill_margin"]["min_spill_margin"].get<double>()) +
              extra};
}

Outcome robustness() {
  const auto cfg = load("certified_slosh.toml");
  const auto rg = resolve_gains(cfg);
  const auto initial = resolve_initial(cfg, rg);
  const auto results = run_robustness(cfg, rg, initial);
  bool pass = results.size() == 3;
  std::string detail;
  for (const auto& r : results) {
    note_mass(r.details["max_mass_drift"].get<double>());
    pass = pass && r.pass;
    detail += fmt("%s%s %s", detail.empty() ? "" : ", ", r.name.c_str(), r.pass ? "ok" : "FAIL");
  }
  return {pass, detail};
}

Outcome corollary() {
  bool pass = true;
  std::string detail;
  for (double delta : {0.1, 1.0, 10.0}) {
    Gains g;
    g.delta = delta;
    const double r = 0.5 * radius_R(kParams, g.functional());
    g.k = 0.5 * g.q * theta(r, kParams, g.functional(), g.sigma);
    const double omega = level_bounds_p(r, kParams, g.functional()).p1;
    const auto rep = check_theorem1(g, omega, r, friction::Frictionless{}, kParams);
    pass = pass && rep.pass && rep.theorem == Certificate::Corollary1;
    detail += fmt("%sdelta=%g %s", detail.empty() ? "" : ", ", delta, rep.pass ? "pass" : "FAIL");
  }
  return {pass, detail};
}

Outcome equilibrium() {
  const auto cfg = load("certified_slosh.toml");
  const auto rg = resolve_gains(cfg);
  const Grid grid(cfg.solver.n, cfg.physical.L);
  const auto eq = LiquidState::equilibrium(grid, cfg.physical);
  const double dt = stable_dt(eq, cfg.physical, grid, cfg.solver);
  TankState tank;
  LiquidState state = eq;
  const double m0 = trapezoid_integral(eq.h(), grid);
  double dev = 0.0, drift = 0.0;
  for (int s = 0; s < 10000; ++s) {
    std::tie(tank, state) = step(tank, state, cfg.friction, rg.gains, cfg.physical, grid, dt, cfg.solver);
    dev = std::max({dev, std::abs(tank.xi), std::abs(tank.w)});
    for (std::size_t i = 0; i < grid.n(); ++i)
      dev = std::max({dev, std::abs(state.h()[i] - eq.h()[i]), std::abs(state.v()[i])});
    drift = std::max(drift, std::abs(trapezoid_integral(state.h(), grid) - m0) / m0);
  }
  note_mass(drift);
  return {dev <= 1e-10, fmt("10000 steps of dt = %.3g, max deviation %.2g", dt, dev)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"level bounds on 1000 random states", 10, level_bounds},
      {"sup-norm and Poincare inequalities on 1000 sine series", 5, sup_and_poincare},
      {"quadratic upper bound near equilibrium", 10, quadratic_upper_bound},
      {"norm equivalence and dissipation bound", 10, sandwich},
      {"energy balance self-convergence", 60, energy_balance},
      {"mass conservation on every trajectory", 0, nullptr},
      {"velocity-independent certificate: closed-loop decay", 60,
       [] { return certified_run("certified_slosh.toml", "V"); }},
      {"robustness of one gain set across friction models", 180, robustness},
      {"general-friction certificate: U decay and velocity cap", 60,
       [] { return certified_run("general_friction.toml", "U"); }},
      {"frictionless gate for delta in {0.1, 1, 10}", 5, corollary},
      {"equilibrium is a fixed point for 10^4 steps", 60, equilibrium},
  };

  std::vector<std::pair<Outcome, double>> results(criteria.size());
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!criteria[i].run) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > criteria[i].budget_s) {
      o.pass = false;
      o.detail += fmt(" (over the %.0f s budget)", criteria[i].budget_s);
    }
    results[i] = {o, secs};
  }
  results[5] = {{g_mass_drift <= 1e-12,
                 fmt("%d trajectories, worst relative drift %.2g", g_trajectories, g_mass_drift)},
                0.0};

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& [o, secs] = results[i];
    std::printf("[%s] %2zu %s: %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name,
                o.detail.c_str(), secs);
    failed += !o.pass;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
