#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "svtank/controller.hpp"
#include "svtank/solver.hpp"

namespace svtank {

struct VerificationResult {
  std::string name;
  std::size_t samples = 0;
  double worst_margin = 0.0;  ///< smallest slack seen; negative means a violation
  bool pass = false;
  nlohmann::json provenance = nlohmann::json::object();
  nlohmann::json details = nlohmann::json::object();
};

nlohmann::json to_json(const VerificationResult& r);

/// Level bounds p1(V) <= h <= p2(V) on seeded random states of S. Sample 0
/// is the equilibrium; odd samples are wide draws, even ones are drawn at a
/// random level below R.
VerificationResult verify_lemma1(std::size_t samples, std::uint64_t seed,
                                 const PhysicalParams& params, const FunctionalParams& fp,
                                 const Grid& grid, unsigned jobs = 1);

/// Sup-norm and derivative-norm inequalities on random sine series, plus the
/// equality case at the first eigenmode.
VerificationResult verify_prop1(std::size_t samples, std::uint64_t seed, double L,
                                unsigned jobs = 1);

/// Quadratic upper bound on V near equilibrium at radius
/// eps = 0.1 min(h*, H_max - h*) / sqrt(L).
VerificationResult verify_prop2(std::size_t samples, std::uint64_t seed,
                                const PhysicalParams& params, const FunctionalParams& fp,
                                const Grid& grid, unsigned jobs = 1);

/// Norm-equivalence sandwich V/G2(V) <= |X|^2 <= V G1(V) and dissipation
/// lower bound V/Lambda(V) <= |h_x|^2 + int h v_x^2 + xi^2 + (w + k xi)^2 on
/// the members of the level-bound sample set with V < R.
VerificationResult verify_sandwich(std::size_t samples, std::uint64_t seed,
                                   const PhysicalParams& params, const FunctionalParams& fp,
                                   double sigma, const Grid& grid, unsigned jobs = 1);

/// Energy balance: time derivatives of E and W along a recorded trajectory
/// (five-point centred differences) against the right-hand sides evaluated on
/// the stored states. Tolerance 1% at 400 nodes, scaled with dx^2.
VerificationResult verify_lemma2(const Trajectory& traj, const Gains& gains,
                                 const FrictionModel& friction, const PhysicalParams& params,
                                 const Grid& grid);

/// Self-convergence of the energy-balance residual: coarse / fine error
/// ratio must lie in [3.5, 4.5] for both identities.
VerificationResult verify_lemma2_convergence(const VerificationResult& coarse,
                                             const VerificationResult& fine);

/// Decay clauses for a certified run. Clauses (monotonicity, membership,
/// spill margin, fitted rates, norm estimates) become observations when the
/// report does not certify the gains or the start lies outside the
/// certified set.
VerificationResult verify_decay(const Trajectory& traj, const FeasibilityReport& report,
                                const PhysicalParams& params, const Grid& grid);

/// Least-squares slope of -log(y) against t over the samples with
/// y > 1e-10 y_ref, skipping the first 5%. Empty when fewer than 3 points remain.
std::optional<double> fit_decay_rate(const std::vector<double>& t, const std::vector<double>& y);

}  // namespace svtank
