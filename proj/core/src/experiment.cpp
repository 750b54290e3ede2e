#include "svtank/experiment.hpp"

#include <cmath>
#include <fstream>

#include "parallel.hpp"
#include "svtank/error.hpp"
#include "svtank/trajectory_io.hpp"

namespace svtank {

using nlohmann::json;

namespace {

int combine(int a, int b) {
  // Config errors dominate runtime failures, which dominate check failures.
  auto rank = [](int c) {
    switch (c) {
      case kExitConfig:
        return 3;
      case kExitRuntime:
        return 2;
      case kExitCheckFailed:
        return 1;
      default:
        return 0;
    }
  };
  return rank(a) >= rank(b) ? a : b;
}

std::filesystem::path out_dir(const ExperimentConfig& cfg, const RunOptions& opts) {
  return opts.out_dir ? *opts.out_dir : std::filesystem::path(cfg.output.dir);
}

std::uint64_t seed_of(const ExperimentConfig& cfg, const RunOptions& opts) {
  return opts.seed ? *opts.seed : cfg.seed;
}

json results_json(const std::vector<VerificationResult>& results) {
  json arr = json::array();
  for (const auto& r : results) arr.push_back(to_json(r));
  return arr;
}

void apply_results(RunOutcome& out) {
  for (const auto& r : out.results)
    if (!r.pass) out.exit_code = combine(out.exit_code, kExitCheckFailed);
}

std::vector<VerificationResult> sampling_suites(const ExperimentConfig& cfg,
                                                const ResolvedGains& rg, bool lemma1, bool prop1,
                                                bool prop2, bool sandwich, std::uint64_t seed,
                                                unsigned jobs) {
  std::vector<VerificationResult> out;
  const Grid grid(cfg.solver.n, cfg.physical.L);
  const auto fp = rg.gains.functional();
  const std::size_t samples = cfg.verify.samples;
  if (lemma1) out.push_back(verify_lemma1(samples, seed, cfg.physical, fp, grid, jobs));
  if (prop1) out.push_back(verify_prop1(samples, seed, cfg.physical.L, jobs));
  if (prop2) out.push_back(verify_prop2(samples, seed, cfg.physical, fp, grid, jobs));
  if (sandwich)
    out.push_back(verify_sandwich(samples, seed, cfg.physical, fp, rg.gains.sigma, grid, jobs));
  return out;
}

}  // namespace

ResolvedGains resolve_gains(const ExperimentConfig& cfg) {
  ResolvedGains rg;
  const auto& gs = cfg.gains;
  if (gs.mode == GainSpec::Mode::Suggest) {
    const Suggestion s = gs.theorem == 2
                             ? suggest_gains_theorem2(gs.omega1, gs.omega2, cfg.friction, cfg.physical, gs.hints)
                             : suggest_gains_theorem1(gs.omega, cfg.friction, cfg.physical, gs.hints);
    rg.gains = s.gains;
    rg.r = s.r;
    rg.report = s.report;
    rg.note = s.reason;
    return rg;
  }
  rg.gains = gs.gains;
  rg.r = gs.r.value_or(0.0);
  if (gs.theorem == 1) rg.report = check_theorem1(rg.gains, gs.omega, rg.r, cfg.friction, cfg.physical);
  if (gs.theorem == 2)
    rg.report = check_theorem2(rg.gains, gs.omega1, gs.omega2, rg.r, cfg.friction, cfg.physical);
  return rg;
}

InitialSpec resolve_initial(const ExperimentConfig& cfg, const ResolvedGains& rg) {
  if (!cfg.level_fraction) return cfg.initial;
  const Grid grid(cfg.solver.n, cfg.physical.L);
  const auto fp = rg.gains.functional();
  const bool general = cfg.gains.theorem == 2;
  const double target = *cfg.level_fraction * (general ? u_level(rg.r, fp) : rg.r);
  return scale_to_level(cfg.initial, cfg.physical, grid, target,
                        [&](const TankState& t, const LiquidState& s) {
                          return general ? functional_U(t, s, cfg.physical, fp, grid)
                                         : clf_V(t, s, cfg.physical, fp, grid);
                        });
}

std::vector<VerificationResult> run_robustness(const ExperimentConfig& cfg,
                                               const ResolvedGains& rg,
                                               const InitialSpec& initial) {
  const double omega = cfg.gains.omega;
  const auto K = assumption_H_bound(cfg.friction, omega, cfg.physical);
  detail::require(K.has_value(), "robustness needs a relation satisfying Assumption (H)");
  std::vector<std::pair<std::string, FrictionModel>> models;
  models.emplace_back("certified_" + friction_name(cfg.friction), cfg.friction);
  models.emplace_back("none", friction::Frictionless{});
  // Constant coefficient with B / omega^2 = K(omega): the largest bounded
  // relation the certificate covers.
  models.emplace_back("bounded", make_bounded_constant(std::max(*K * omega * omega, 1e-300)));

  const Grid grid(cfg.solver.n, cfg.physical.L);
  const auto [tank0, state0] = make_initial(initial, cfg.physical, grid);
  std::vector<VerificationResult> out;
  for (const auto& [name, model] : models) {
    const auto report = check_theorem1(rg.gains, omega, rg.r, model, cfg.physical);
    const auto traj = simulate(tank0, state0, rg.gains, model, cfg.physical, cfg.solver);
    auto res = verify_decay(traj, report, cfg.physical, grid);
    res.name = "robustness_" + name;
    res.details["friction"] = to_json(model);
    res.details["certificate_pass"] = report.pass;
    res.details["max_mass_drift"] = trajectory_summary(traj)["max_mass_drift"];
    out.push_back(std::move(res));
  }
  return out;
}

RunOutcome run_gains(const ExperimentConfig& cfg_in, bool force_suggest, const RunOptions& opts) {
  RunOutcome out;
  ExperimentConfig cfg = cfg_in;
  if (force_suggest) {
    cfg.gains.mode = GainSpec::Mode::Suggest;
    if (cfg.gains.theorem == 0) cfg.gains.theorem = 1;
  }
  if (cfg.gains.theorem == 0) throw ConfigError("gains check needs gains.theorem = 1 or 2");
  const auto rg = resolve_gains(cfg);
  out.report = rg.report;
  out.summary["feasibility"] = to_json(*rg.report);
  if (!rg.note.empty()) out.summary["note"] = rg.note;
  if (!rg.report->pass) out.exit_code = kExitCheckFailed;
  if (opts.write_files) write_json(out.summary["feasibility"], out_dir(cfg, opts) / "feasibility.json");
  return out;
}

RunOutcome run_verify_suite(const ExperimentConfig& cfg, const RunOptions& opts) {
  RunOutcome out;
  const auto rg = resolve_gains(cfg);
  const auto& v = cfg.verify;
  const bool any = v.lemma1 || v.prop1 || v.prop2 || v.sandwich;
  out.results = sampling_suites(cfg, rg, !any || v.lemma1, !any || v.prop1, !any || v.prop2,
                                !any || v.sandwich, seed_of(cfg, opts), opts.jobs);
  apply_results(out);
  out.summary["verification"] = results_json(out.results);
  out.summary["gains"] = to_json(rg.gains);
  if (opts.write_files) write_json(out.summary, out_dir(cfg, opts) / "verification.json");
  return out;
}

RunOutcome run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  RunOutcome out;
  const auto dir = out_dir(cfg, opts);
  const auto seed = seed_of(cfg, opts);
  const Grid grid(cfg.solver.n, cfg.physical.L);

  const auto rg = resolve_gains(cfg);
  out.summary["gains"] = to_json(rg.gains);
  out.summary["r"] = rg.r;
  if (rg.report) {
    out.report = rg.report;
    out.summary["feasibility"] = to_json(*rg.report);
    if (opts.write_files) write_json(out.summary["feasibility"], dir / "feasibility.json");
    if (!rg.report->pass) out.exit_code = kExitCheckFailed;
    if (!rg.note.empty()) out.summary["note"] = rg.note;
    if (cfg.gains.mode == GainSpec::Mode::Suggest && !rg.report->pass) {
      // Suggested gains that fail their own certificate are not worth simulating.
      if (opts.write_files) write_json(out.summary, dir / "summary.json");
      return out;
    }
  }

  const InitialSpec initial = resolve_initial(cfg, rg);
  const auto [tank0, state0] = make_initial(initial, cfg.physical, grid);
  const auto fp = rg.gains.functional();
  json init = {{"spec", to_json(initial)},
               {"lyapunov", to_json(evaluate_lyapunov(tank0, state0, cfg.physical, fp, grid, rg.r))}};
  out.summary["initial"] = init;
  if (opts.write_files) write_json(init, dir / "initial.json");

  Trajectory traj = simulate(tank0, state0, rg.gains, cfg.friction, cfg.physical, cfg.solver);
  out.summary["trajectory"] = trajectory_summary(traj);
  if (opts.write_files) {
    write_trajectory_csv(traj, dir / "trajectory.csv");
    if (cfg.output.fields) write_fields(traj, grid, dir / "fields");
  }
  if (traj.termination == Termination::PositivityFailure ||
      traj.termination == Termination::NonFinite) {
    out.exit_code = combine(out.exit_code, kExitRuntime);
  } else if (traj.termination == Termination::Spill) {
    out.exit_code = combine(out.exit_code, kExitCheckFailed);
  }
  out.warnings = traj.warnings;

  const auto& v = cfg.verify;
  if (v.decay && rg.report) out.results.push_back(verify_decay(traj, *rg.report, cfg.physical, grid));
  if (v.lemma2 || v.lemma2_convergence) {
    auto coarse = verify_lemma2(traj, rg.gains, cfg.friction, cfg.physical, grid);
    if (v.lemma2_convergence) {
      SolverConfig fine_cfg = cfg.solver;
      fine_cfg.n = 2 * (cfg.solver.n - 1) + 1;
      const Grid fine_grid(fine_cfg.n, cfg.physical.L);
      const auto [tf, sf] = make_initial(initial, cfg.physical, fine_grid);
      const auto fine_traj = simulate(tf, sf, rg.gains, cfg.friction, cfg.physical, fine_cfg);
      const auto fine = verify_lemma2(fine_traj, rg.gains, cfg.friction, cfg.physical, fine_grid);
      auto conv = verify_lemma2_convergence(coarse, fine);
      conv.details["fine_max_mass_drift"] = trajectory_summary(fine_traj)["max_mass_drift"];
      out.results.push_back(std::move(conv));
    }
    out.results.push_back(std::move(coarse));
  }
  auto suites = sampling_suites(cfg, rg, v.lemma1, v.prop1, v.prop2, v.sandwich, seed, opts.jobs);
  for (auto& s : suites) out.results.push_back(std::move(s));
  if (v.robustness) {
    for (auto& s : run_robustness(cfg, rg, initial)) out.results.push_back(std::move(s));
  }
  apply_results(out);
  if (opts.strict && !out.warnings.empty()) out.exit_code = combine(out.exit_code, kExitCheckFailed);

  out.summary["verification"] = results_json(out.results);
  out.summary["warnings"] = out.warnings;
  out.summary["exit_code"] = out.exit_code;
  if (opts.write_files) {
    write_json(results_json(out.results), dir / "verification.json");
    write_json(out.summary, dir / "summary.json");
  }
  out.trajectory = std::move(traj);
  return out;
}

RunOutcome run_sweep(const json& config, const std::string& param,
                     const std::vector<std::string>& values, const RunOptions& opts) {
  detail::require(!values.empty(), "sweep needs at least one value");
  const std::filesystem::path dir =
      opts.out_dir ? *opts.out_dir
                   : std::filesystem::path(config.contains("output")
                                               ? config["output"].value("dir", std::string("out"))
                                               : std::string("out"));
  // Parse every variant up front so a bad value is a config error before any run starts.
  std::vector<ExperimentConfig> cfgs;
  for (const auto& value : values) {
    json variant = config;
    set_config_value(variant, param, value);
    cfgs.push_back(experiment_from_json(variant));
  }
  std::vector<RunOutcome> runs(values.size());
  detail::parallel_for(values.size(), opts.jobs, [&](std::size_t i) {
    RunOptions o = opts;
    o.out_dir = dir / ("run_" + std::to_string(i));
    o.jobs = 1;
    try {
      runs[i] = run_experiment(cfgs[i], o);
    } catch (const InvalidInput& e) {
      runs[i].exit_code = kExitConfig;
      runs[i].summary["error"] = e.what();
    } catch (const std::exception& e) {
      runs[i].exit_code = kExitRuntime;
      runs[i].summary["error"] = e.what();
    }
  });

  RunOutcome out;
  json table = json::array();
  for (std::size_t i = 0; i < runs.size(); ++i) {
    out.exit_code = combine(out.exit_code, runs[i].exit_code);
    json row = {{"index", i}, {"value", values[i]}, {"exit_code", runs[i].exit_code}};
    if (runs[i].summary.contains("trajectory")) row["trajectory"] = runs[i].summary["trajectory"];
    if (runs[i].summary.contains("error")) row["error"] = runs[i].summary["error"];
    table.push_back(std::move(row));
  }
  out.summary = {{"param", param}, {"runs", table}, {"exit_code", out.exit_code}};
  if (opts.write_files) {
    write_json(out.summary, dir / "sweep.json");
    std::filesystem::create_directories(dir);
    std::ofstream csv(dir / "sweep.csv");
    csv << "index,value,exit_code,termination,V0,V_final\n";
    for (const auto& row : table) {
      csv << row["index"].get<std::size_t>() << ',' << row["value"].get<std::string>() << ','
          << row["exit_code"].get<int>() << ',';
      if (row.contains("trajectory")) {
        const auto& t = row["trajectory"];
        csv << t.value("termination", std::string()) << ',' << t.value("V0", 0.0) << ','
            << t.value("V_final", 0.0);
      } else {
        csv << "error,,";
      }
      csv << '\n';
    }
  }
  return out;
}

}  // namespace svtank
