#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "svtank/config.hpp"
#include "svtank/verify.hpp"

namespace svtank {

enum ExitCode : int { kExitOk = 0, kExitRuntime = 1, kExitConfig = 2, kExitCheckFailed = 3 };

struct RunOptions {
  std::optional<std::filesystem::path> out_dir;  ///< overrides output.dir
  std::optional<std::uint64_t> seed;             ///< overrides the config seed
  unsigned jobs = 1;
  bool strict = false;  ///< warnings count as failures
  bool write_files = true;
};

struct ResolvedGains {
  Gains gains;
  double r = 0.0;
  std::optional<FeasibilityReport> report;
  std::string note;
};

/// Suggests or validates gains as configured.
ResolvedGains resolve_gains(const ExperimentConfig& cfg);

/// Initial state on the solver grid, rescaled to the requested fraction of
/// the certified level when the config asks for it. Returns the spec actually used.
InitialSpec resolve_initial(const ExperimentConfig& cfg, const ResolvedGains& gains);

struct RunOutcome {
  int exit_code = kExitOk;
  nlohmann::json summary = nlohmann::json::object();
  std::optional<FeasibilityReport> report;
  std::optional<Trajectory> trajectory;
  std::vector<VerificationResult> results;
  std::vector<std::string> warnings;
};

/// Full pipeline: gains, feasibility report, simulation, requested checks.
RunOutcome run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});

/// Feasibility report only. `force_suggest` ignores explicit gains.
RunOutcome run_gains(const ExperimentConfig& cfg, bool force_suggest, const RunOptions& opts = {});

/// Sampling suites that need no simulation. When none is enabled in the
/// config, all four run.
RunOutcome run_verify_suite(const ExperimentConfig& cfg, const RunOptions& opts = {});

/// The certified gain set under the certification model, no friction, and a
/// bounded relation with the same K(omega). Theorem-1 configs only.
std::vector<VerificationResult> run_robustness(const ExperimentConfig& cfg,
                                               const ResolvedGains& gains,
                                               const InitialSpec& initial);

/// One run per value of `param` (dotted path), executed on up to `jobs`
/// threads. Each run writes into <out>/run_<index>.
RunOutcome run_sweep(const nlohmann::json& config, const std::string& param,
                     const std::vector<std::string>& values, const RunOptions& opts = {});

}  // namespace svtank
