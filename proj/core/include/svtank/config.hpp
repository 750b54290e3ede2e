#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"
#include "svtank/controller.hpp"
#include "svtank/initial.hpp"
#include "svtank/solver.hpp"

namespace svtank {

/// Parses the sectioned key = value format (see docs/config.md) into a JSON
/// object with one member per section. Text starting with '{' is read as JSON.
nlohmann::json parse_config_text(std::string_view text);
nlohmann::json load_config_file(const std::filesystem::path& path);

/// Sets a dotted path such as "physical.mu" from a textual value, keeping
/// numbers numeric and booleans boolean.
void set_config_value(nlohmann::json& config, const std::string& dotted_path,
                      const std::string& value);

struct GainSpec {
  enum class Mode { Explicit, Suggest };
  Mode mode = Mode::Suggest;
  int theorem = 1;  ///< 0 = no certificate requested
  double omega = 0.25;
  double omega1 = 0.25;
  double omega2 = 0.1;
  std::optional<double> r;  ///< required in explicit mode when a certificate is requested
  Gains gains;
  SuggestHints hints;
};

struct VerifySpec {
  bool lemma1 = false;
  bool prop1 = false;
  bool prop2 = false;
  bool sandwich = false;
  bool lemma2 = false;
  bool lemma2_convergence = false;
  bool decay = true;
  bool robustness = false;
  std::size_t samples = 1000;
};

struct OutputSpec {
  std::string dir = "out";
  bool fields = false;
};

struct ExperimentConfig {
  PhysicalParams physical;
  nlohmann::json friction_spec = {{"type", "none"}};
  FrictionModel friction = friction::Frictionless{};
  GainSpec gains;
  InitialSpec initial;
  /// Rescale the initial amplitudes so V(0) (or U(0) under the general
  /// certificate) equals this fraction of the certified level.
  std::optional<double> level_fraction;
  SolverConfig solver;
  VerifySpec verify;
  OutputSpec output;
  std::uint64_t seed = 42;
  nlohmann::json source;
};

/// Throws ConfigError naming the offending key or invariant.
ExperimentConfig experiment_from_json(const nlohmann::json& j);

}  // namespace svtank
