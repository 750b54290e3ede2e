#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "svtank/friction.hpp"
#include "svtank/functionals.hpp"

namespace svtank {

/// Controller gains plus the two U-shape parameters used by the estimates.
struct Gains {
  double sigma = 1.0;
  double k = 0.05;
  double q = 1.0;
  double delta = 1.0;
  double beta = 1.0;
  double gamma = 1.0;

  FunctionalParams functional() const { return {delta, q, k, beta, gamma}; }
  void validate() const;
};

nlohmann::json to_json(const Gains& gains);
Gains gains_from_json(const nlohmann::json& j);

/// f = -sigma ((delta + 1) M + mu D - q (w + k xi)) from the four measured
/// quantities: total momentum M, wall level difference D = h(L) - h(0),
/// tank velocity w and position error xi.
double feedback_from_measurements(double momentum, double level_difference, double w, double xi,
                                  const Gains& gains, double mu);

/// Momentum feedback acceleration for the current state.
double feedback_f(const TankState& tank, const LiquidState& state, const Gains& gains,
                  const PhysicalParams& params, const Grid& grid);

enum class Certificate { Theorem1, Theorem2, Corollary1 };

std::string to_string(Certificate c);

struct Check {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  ///< (rhs - lhs) / |lhs|, or rhs - lhs when lhs = 0
  bool strict = true;
  bool pass = false;
  std::string note;
};

struct FeasibilityReport {
  Certificate theorem = Certificate::Theorem1;
  bool pass = false;
  double r = 0.0;
  double R = 0.0;
  std::vector<Check> checks;
  Gains gains;
  nlohmann::json constants = nlohmann::json::object();

  const Check* find(const std::string& name) const;
};

nlohmann::json to_json(const FeasibilityReport& report);

/// Velocity-independent-bound certificate on X_V(r) within levels >= omega.
/// Failures are report entries; nothing here throws on infeasible input.
FeasibilityReport check_theorem1(const Gains& gains, double omega, double r,
                                 const FrictionModel& friction, const PhysicalParams& params);

/// General-friction certificate on X_U(r) within levels > omega1 and speeds < omega2.
FeasibilityReport check_theorem2(const Gains& gains, double omega1, double omega2, double r,
                                 const FrictionModel& friction, const PhysicalParams& params);

struct SuggestHints {
  double sigma = 1.0;
  double q = 1.0;
  double delta_min = 1.0;     ///< floor on delta so R does not collapse for weak friction
  double margin = 0.25;       ///< relative slack on each strict inequality
  double r_fraction = 0.5;    ///< starting point r = r_fraction * R
  double k_fraction = 0.5;    ///< k = k_fraction * q * theta
};

struct Suggestion {
  bool feasible = false;
  std::string reason;
  Gains gains;
  double r = 0.0;
  FeasibilityReport report;
};

Suggestion suggest_gains_theorem1(double omega, const FrictionModel& friction,
                                  const PhysicalParams& params, const SuggestHints& hints = {});

Suggestion suggest_gains_theorem2(double omega1, double omega2, const FrictionModel& friction,
                                  const PhysicalParams& params, const SuggestHints& hints = {});

/// beta and gamma making the U-estimate valid for a Theorem-1 gain set, given
/// the friction bound K at level p1(r). `margin` multiplies each bound.
std::pair<double, double> select_beta_gamma(const Gains& gains, double r, double K,
                                            const PhysicalParams& params, double margin);

struct DecayRates {
  double omega = 0.0;       ///< dissipation constant of dV/dt
  double lambda_V = 0.0;    ///< exponential rate of V
  double lambda_U = 0.0;    ///< exponential rate of U (omega bar)
  double lambda = 0.0;      ///< state-norm rate, lambda_V / 2
  double lambda_bar = 0.0;  ///< |v_x| rate, lambda_U / 2
  double M = 0.0;           ///< sqrt(G1(r) G2(r))
  double M_bar = 0.0;       ///< sqrt(2 (1 + gamma)(1 + G2(r)) exp(beta r))
};

/// Certified rates for a gain set. `K` is the friction bound in force:
/// K(p1(r)) for Theorem 1 or K~ for Theorem 2. Throws InvalidInput when the
/// rates would not be positive.
DecayRates decay_rates(const Gains& gains, double r, const PhysicalParams& params, double K,
                       Certificate theorem = Certificate::Theorem1);

nlohmann::json to_json(const DecayRates& rates);

}  // namespace svtank
