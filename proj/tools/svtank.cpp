// Command-line front end: simulate, gains check|suggest, verify, sweep.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "svtank/error.hpp"
#include "svtank/experiment.hpp"

namespace {

using svtank::RunOptions;
using svtank::RunOutcome;

void print_outcome(const RunOutcome& out) {
  if (out.report) {
    std::cout << "certificate " << svtank::to_string(out.report->theorem) << ": "
              << (out.report->pass ? "PASS" : "FAIL") << "\n";
    for (const auto& c : out.report->checks) {
      std::cout << "  " << (c.pass ? "ok   " : "FAIL ") << c.name;
      if (!c.note.empty()) std::cout << " (" << c.note << ")";
      if (std::isfinite(c.margin)) std::cout << " margin=" << c.margin;
      std::cout << "\n";
    }
  }
  if (out.summary.contains("note")) std::cout << "note: " << out.summary["note"].get<std::string>() << "\n";
  if (out.summary.contains("trajectory")) {
    const auto& t = out.summary["trajectory"];
    std::cout << "simulation: " << t["termination"].get<std::string>() << " after "
              << t["steps"].get<std::size_t>() << " steps, t = " << t["t_stop"].get<double>() << "\n";
  }
  for (const auto& r : out.results)
    std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << " (samples " << r.samples
              << ", worst margin " << r.worst_margin << ")\n";
  for (const auto& w : out.warnings) std::cerr << "warning: " << w << "\n";
}

std::vector<std::string> split_values(const std::string& list) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    const auto comma = list.find(',', start);
    const auto piece = list.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!piece.empty()) out.push_back(piece);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulator and certificate checker for a liquid-carrying tank under momentum feedback"};
  app.require_subcommand(1);

  std::string out_dir;
  std::optional<std::uint64_t> seed;
  unsigned jobs = 1;
  bool strict = false;
  app.add_option("--out", out_dir, "Output directory (overrides output.dir)");
  app.add_option("--seed", seed, "Random seed for the sampling suites");
  app.add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--strict", strict, "Treat warnings as failures");

  std::string config_path;
  auto* sim = app.add_subcommand("simulate", "Certify gains, simulate and run the configured checks");
  sim->add_option("config", config_path, "Config file")->required();

  auto* gains = app.add_subcommand("gains", "Gain feasibility");
  gains->require_subcommand(1);
  auto* check = gains->add_subcommand("check", "Check the configured gains");
  check->add_option("config", config_path, "Config file")->required();
  auto* suggest = gains->add_subcommand("suggest", "Suggest gains for the configured targets");
  suggest->add_option("config", config_path, "Config file")->required();

  auto* verify = app.add_subcommand("verify", "Sampling suites that need no simulation");
  verify->add_option("config", config_path, "Config file")->required();

  std::string param, values;
  auto* sweep = app.add_subcommand("sweep", "Run the pipeline once per parameter value");
  sweep->add_option("config", config_path, "Config file")->required();
  sweep->add_option("--param", param, "Dotted parameter path, e.g. physical.mu")->required();
  sweep->add_option("--values", values, "Comma-separated values")->required();

  for (auto* sub : {sim, check, suggest, verify, sweep}) {
    sub->add_option("--out", out_dir, "Output directory (overrides output.dir)");
    sub->add_option("--seed", seed, "Random seed for the sampling suites");
    sub->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--strict", strict, "Treat warnings as failures");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : svtank::kExitConfig;
  }

  RunOptions opts;
  if (!out_dir.empty()) opts.out_dir = out_dir;
  opts.seed = seed;
  opts.jobs = jobs;
  opts.strict = strict;

  try {
    const auto raw = svtank::load_config_file(config_path);
    RunOutcome out;
    if (*sweep) {
      out = svtank::run_sweep(raw, param, split_values(values), opts);
      for (const auto& row : out.summary["runs"])
        std::cout << "run " << row["index"] << " " << param << "=" << row["value"].get<std::string>()
                  << " exit " << row["exit_code"] << "\n";
      return out.exit_code;
    }
    const auto cfg = svtank::experiment_from_json(raw);
    if (*sim) {
      out = svtank::run_experiment(cfg, opts);
    } else if (*check) {
      out = svtank::run_gains(cfg, false, opts);
    } else if (*suggest) {
      out = svtank::run_gains(cfg, true, opts);
      std::cout << out.summary["feasibility"].dump(2) << "\n";
    } else {
      out = svtank::run_verify_suite(cfg, opts);
    }
    print_outcome(out);
    return out.exit_code;
  } catch (const svtank::InvalidInput& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return svtank::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return svtank::kExitRuntime;
  }
}
