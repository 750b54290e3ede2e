#pragma once

#include <optional>

#include "json.hpp"
#include "svtank/grid.hpp"
#include "svtank/state.hpp"

namespace svtank {

/// Weights of the Lyapunov tower: delta mixes E and W inside V, (q, k) weight
/// the tank terms, (beta, gamma) shape U.
struct FunctionalParams {
  double delta = 1.0;
  double q = 1.0;
  double k = 0.05;
  double beta = 1.0;
  double gamma = 1.0;

  void validate() const;
};

// ---------------------------------------------------------------------------
// Energy functionals. All integrals use the trapezoid rule on `grid`, and
// h_x, v_x come from central_derivative.
// ---------------------------------------------------------------------------

/// Mechanical energy: kinetic plus potential, relative to h*.
double energy_E(const LiquidState& state, const PhysicalParams& params, const Grid& grid);

/// Modified energy built on the "effective velocity" h v + mu h_x.
double energy_W(const LiquidState& state, const PhysicalParams& params, const Grid& grid);

/// The control Lyapunov functional V = delta E + W + q k^2 xi^2 / 2 + q (w + k xi)^2 / 2.
double clf_V(const TankState& tank, const LiquidState& state, const PhysicalParams& params,
             const FunctionalParams& fp, const Grid& grid);

/// U = V + (|v_x|^2 / 2 + gamma V) exp(beta V).
double functional_U(const TankState& tank, const LiquidState& state, const PhysicalParams& params,
                    const FunctionalParams& fp, const Grid& grid);

/// U from precomputed V and |v_x|_2^2.
double functional_U_from(double V, double vx_sq, const FunctionalParams& fp);

/// |v_x|_2^2.
double vx_l2_sq(const LiquidState& state, const Grid& grid);

// ---------------------------------------------------------------------------
// Level bounds.
// ---------------------------------------------------------------------------

/// Strictly increasing bijection R -> R with G(h*) = 0.
double G_of_h(double h, const PhysicalParams& params);

/// |h - h*| / sqrt(h) for h > 0.
double G_derivative(double h, const PhysicalParams& params);

/// Inverse of G_of_h to 1e-12 relative.
double G_inverse(double y, const PhysicalParams& params);

struct LevelBounds {
  double p1 = 0.0;
  double p2 = 0.0;
};

/// p1(s) <= h(x) <= p2(s) for every state in S with V <= s.
LevelBounds level_bounds_p(double s, const PhysicalParams& params, const FunctionalParams& fp);

/// Largest V level for which p1 stays positive.
double positivity_threshold(const PhysicalParams& params, const FunctionalParams& fp);

/// Spill-safety radius: V < R implies p2(V) < H_max and p1(V) > 0.
double radius_R(const PhysicalParams& params, const FunctionalParams& fp);

/// k/q ceiling as a function of a lower level bound `level` (p1(r) or omega_1).
double theta_of_level(double level, const PhysicalParams& params, const FunctionalParams& fp,
                      double sigma);

/// theta(r) with level p1(r). Throws if p1(r) <= 0.
double theta(double r, const PhysicalParams& params, const FunctionalParams& fp, double sigma);

// ---------------------------------------------------------------------------
// Constructive constants used by the dissipation and norm-equivalence bounds.
// ---------------------------------------------------------------------------

class LemmaConstants {
 public:
  /// `omega1` enables the general-friction constants (theta~, alpha~).
  LemmaConstants(double r, const PhysicalParams& params, const FunctionalParams& fp, double sigma,
                 std::optional<double> omega1 = std::nullopt);

  double Lambda(double s) const;
  double G1(double s) const;
  double G2(double s) const;
  double phi(double s) const;
  double alpha(double s) const;

  double r() const { return r_; }
  double R() const { return R_; }
  double p1_r() const { return p1_r_; }
  double theta_r() const { return theta_r_; }
  double phi_r() const { return phi(r_); }
  double alpha_r() const { return alpha(r_); }
  double eps1() const { return eps1_; }
  double eps2() const { return eps2_; }
  std::optional<double> theta_tilde() const { return theta_tilde_; }
  std::optional<double> alpha_tilde() const { return alpha_tilde_; }

 private:
  PhysicalParams params_;
  FunctionalParams fp_;
  double sigma_;
  double r_;
  double R_;
  double p1_r_;
  double theta_r_;
  double eps1_;
  double eps2_;
  std::optional<double> theta_tilde_;
  std::optional<double> alpha_tilde_;
};

// ---------------------------------------------------------------------------
// Report.
// ---------------------------------------------------------------------------

struct LyapunovReport {
  double E = 0.0;
  double W = 0.0;
  double V = 0.0;
  double U = 0.0;
  double p1_of_V = 0.0;
  double p2_of_V = 0.0;
  double R = 0.0;
  bool in_XV_r = false;
  bool in_XU_r = false;
  double vx_l2 = 0.0;
};

/// Evaluates the tower at one state. Membership flags refer to level `r`.
LyapunovReport evaluate_lyapunov(const TankState& tank, const LiquidState& state,
                                 const PhysicalParams& params, const FunctionalParams& fp,
                                 const Grid& grid, double r);

/// Level bound r + gamma r exp(beta r) that defines the U-sublevel set.
double u_level(double r, const FunctionalParams& fp);

nlohmann::json to_json(const LyapunovReport& report);

}  // namespace svtank
