#include "svtank/controller.hpp"

#include <cmath>
#include <numbers>

#include "svtank/error.hpp"

namespace svtank {

using detail::require;
using std::numbers::pi;

void Gains::validate() const {
  require(std::isfinite(sigma) && sigma > 0.0, "gains.sigma must be > 0");
  functional().validate();
}

nlohmann::json to_json(const Gains& g) {
  return {{"sigma", g.sigma}, {"k", g.k},       {"q", g.q},
          {"delta", g.delta}, {"beta", g.beta}, {"gamma", g.gamma}};
}

Gains gains_from_json(const nlohmann::json& j) {
  Gains g;
  g.sigma = j.value("sigma", g.sigma);
  g.k = j.value("k", g.k);
  g.q = j.value("q", g.q);
  g.delta = j.value("delta", g.delta);
  g.beta = j.value("beta", g.beta);
  g.gamma = j.value("gamma", g.gamma);
  g.validate();
  return g;
}

double feedback_from_measurements(double momentum, double level_difference, double w, double xi,
                                  const Gains& gains, double mu) {
  return -gains.sigma * ((gains.delta + 1.0) * momentum + mu * level_difference -
                         gains.q * (w + gains.k * xi));
}

double feedback_f(const TankState& tank, const LiquidState& state, const Gains& gains,
                  const PhysicalParams& params, const Grid& grid) {
  require(state.size() == grid.n(), "feedback_f: state does not match grid");
  const auto& h = state.h();
  const auto& v = state.v();
  std::vector<double> hv(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) hv[i] = h[i] * v[i];
  return feedback_from_measurements(trapezoid_integral(hv, grid), h.back() - h.front(), tank.w,
                                    tank.xi, gains, params.mu);
}

std::string to_string(Certificate c) {
  switch (c) {
    case Certificate::Theorem1:
      return "theorem1";
    case Certificate::Theorem2:
      return "theorem2";
    case Certificate::Corollary1:
      return "corollary1";
  }
  return "unknown";
}

const Check* FeasibilityReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

nlohmann::json to_json(const FeasibilityReport& rep) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : rep.checks) {
    nlohmann::json e{{"name", c.name},     {"lhs", c.lhs},       {"rhs", c.rhs},
                     {"margin", c.margin}, {"strict", c.strict}, {"pass", c.pass}};
    if (!c.note.empty()) e["note"] = c.note;
    checks.push_back(std::move(e));
  }
  return {{"theorem", to_string(rep.theorem)}, {"pass", rep.pass},          {"r", rep.r},
          {"R", rep.R},                        {"checks", std::move(checks)}, {"gains", to_json(rep.gains)},
          {"constants", rep.constants}};
}

namespace {

Check make_check(std::string name, double lhs, double rhs, bool strict) {
  Check c;
  c.name = std::move(name);
  c.lhs = lhs;
  c.rhs = rhs;
  c.strict = strict;
  c.margin = lhs != 0.0 ? (rhs - lhs) / std::abs(lhs) : rhs - lhs;
  c.pass = std::isfinite(lhs) && std::isfinite(rhs) && (strict ? rhs > lhs : rhs >= lhs);
  return c;
}

Check failed_check(std::string name, std::string note) {
  Check c;
  c.name = std::move(name);
  c.lhs = std::nan("");
  c.rhs = std::nan("");
  c.margin = std::nan("");
  c.pass = false;
  c.note = std::move(note);
  return c;
}

void finalize(FeasibilityReport& rep) {
  rep.pass = !rep.checks.empty();
  for (const auto& c : rep.checks) rep.pass = rep.pass && c.pass;
}

bool is_frictionless(const FrictionModel& f) {
  return std::holds_alternative<friction::Frictionless>(f);
}

}  // namespace

FeasibilityReport check_theorem1(const Gains& gains, double omega, double r,
                                 const FrictionModel& friction, const PhysicalParams& params) {
  FeasibilityReport rep;
  rep.gains = gains;
  rep.r = r;
  rep.theorem = is_frictionless(friction) ? Certificate::Corollary1 : Certificate::Theorem1;
  try {
    params.validate();
    gains.validate();
    validate(friction);
    require(omega > 0.0 && omega <= params.h_star(), "omega must lie in (0, h*]");
  } catch (const InvalidInput& e) {
    rep.checks.push_back(failed_check("inputs", e.what()));
    finalize(rep);
    return rep;
  }
  const auto fp = gains.functional();
  rep.R = radius_R(params, fp);

  const auto K = assumption_H_bound(friction, omega, params);
  if (K) {
    auto c = make_check("assumption_H", 0.0, 0.0, false);
    c.note = "K(omega) = " + std::to_string(*K);
    rep.checks.push_back(c);
    rep.checks.push_back(
        make_check("friction_dominance", params.mu * *K, 2.0 * params.g * (gains.delta + 1.0), true));
  } else {
    rep.checks.push_back(failed_check("assumption_H", "Assumption (H) not satisfied"));
    rep.checks.push_back(failed_check("friction_dominance", "needs Assumption (H)"));
  }

  rep.checks.push_back(make_check("r_nonnegative", 0.0, r, false));
  rep.checks.push_back(make_check("spill_radius", r, rep.R, true));
  if (!(r >= 0.0 && r < rep.R)) {
    rep.checks.push_back(failed_check("level_floor", "r outside [0, R)"));
    rep.checks.push_back(failed_check("position_gain", "r outside [0, R)"));
    finalize(rep);
    return rep;
  }
  const double p1 = level_bounds_p(r, params, fp).p1;
  rep.checks.push_back(make_check("level_floor", omega, p1, false));
  if (p1 <= 0.0) {
    rep.checks.push_back(failed_check("position_gain", "p1(r) <= 0"));
    finalize(rep);
    return rep;
  }
  const double th = theta_of_level(p1, params, fp, gains.sigma);
  rep.checks.push_back(make_check("position_gain", gains.k, gains.q * th, true));
  finalize(rep);

  rep.constants["p1_r"] = p1;
  rep.constants["theta_r"] = th;
  if (K) rep.constants["K_omega"] = *K;
  if (rep.pass) {
    // Constants of the estimates. beta and gamma do not gate the certificate
    // (the stabilization statement does not depend on them) but the
    // |v_x| estimate is only valid when they satisfy the selection rule.
    LemmaConstants lc(r, params, fp, gains.sigma);
    const double phi = lc.phi_r();
    const double Kp = assumption_H_bound(friction, std::min(p1, params.h_star()), params).value_or(*K);
    rep.constants["phi_r"] = phi;
    rep.constants["alpha_r"] = lc.alpha_r();
    rep.constants["eps1"] = lc.eps1();
    rep.constants["eps2"] = lc.eps2();
    rep.constants["Lambda_r"] = lc.Lambda(r);
    const double bg_need = 4.0 * params.H_max * lc.eps2() / (params.mu * gains.delta * p1 * p1 * phi);
    const double b_need = 20.0 * params.L * params.H_max / (3.0 * params.mu * params.mu * gains.delta * phi);
    const double g_need = 5.0 * (params.H_max * Kp * Kp + lc.eps1()) /
                          (gains.delta * params.mu * lc.alpha_r());
    const bool bg_ok = phi > 0.0 && lc.alpha_r() > 0.0 && gains.beta * gains.gamma >= bg_need &&
                       gains.beta >= b_need && gains.gamma > g_need;
    rep.constants["beta_gamma_valid"] = bg_ok;
    rep.constants["beta_min"] = b_need;
    rep.constants["gamma_min"] = g_need;
    rep.constants["beta_gamma_min"] = bg_need;
    try {
      rep.constants["rates"] = to_json(decay_rates(gains, r, params, K.value_or(0.0)));
    } catch (const InvalidInput& e) {
      rep.constants["rates_error"] = e.what();
    }
  }
  return rep;
}

FeasibilityReport check_theorem2(const Gains& gains, double omega1, double omega2, double r,
                                 const FrictionModel& friction, const PhysicalParams& params) {
  FeasibilityReport rep;
  rep.gains = gains;
  rep.r = r;
  rep.theorem = Certificate::Theorem2;
  try {
    params.validate();
    gains.validate();
    validate(friction);
    require(omega1 > 0.0 && omega1 < params.h_star(), "omega1 must lie in (0, h*)");
    require(omega2 > 0.0, "omega2 must be > 0");
  } catch (const InvalidInput& e) {
    rep.checks.push_back(failed_check("inputs", e.what()));
    finalize(rep);
    return rep;
  }
  const auto fp = gains.functional();
  rep.R = radius_R(params, fp);
  const double Kt = K_tilde(friction, omega1, omega2, params);
  const double tht = theta_of_level(omega1, params, fp, gains.sigma);
  rep.constants["K_tilde"] = Kt;
  rep.constants["theta_tilde"] = tht;

  rep.checks.push_back(
      make_check("friction_dominance", params.mu * Kt, 2.0 * params.g * (gains.delta + 1.0), true));
  rep.checks.push_back(make_check("position_gain", gains.k, gains.q * tht, true));
  rep.checks.push_back(make_check("r_nonnegative", 0.0, r, false));
  rep.checks.push_back(make_check("spill_radius", r, rep.R, true));
  if (r >= 0.0 && r < rep.R) {
    rep.checks.push_back(make_check("level_floor", omega1, level_bounds_p(r, params, fp).p1, true));
    rep.checks.push_back(
        make_check("velocity_cap", std::sqrt(2.0 * params.L * u_level(r, fp) / 3.0), omega2, true));
  } else {
    rep.checks.push_back(failed_check("level_floor", "r outside [0, R)"));
    rep.checks.push_back(failed_check("velocity_cap", "r outside [0, R)"));
  }

  // alpha~, eps1, eps2 do not depend on r, so evaluate them at r = 0.
  const LemmaConstants lc(0.0, params, fp, gains.sigma, omega1);
  const double at = *lc.alpha_tilde();
  rep.constants["alpha_tilde"] = at;
  rep.constants["eps1"] = lc.eps1();
  rep.constants["eps2"] = lc.eps2();
  if (at > 0.0) {
    rep.checks.push_back(make_check(
        "gamma_lower_bound",
        5.0 * (params.H_max * Kt * Kt + lc.eps1()) / (gains.delta * params.mu * at), gains.gamma,
        true));
  } else {
    rep.checks.push_back(failed_check("gamma_lower_bound", "alpha~ <= 0 (k >= q theta~)"));
  }
  const double b1 = 4.0 * lc.eps2() /
                    ((2.0 * at + params.mu * gains.delta * gains.gamma * omega1) * omega1 * omega1);
  const double b2 = 20.0 * params.L / (3.0 * params.mu * params.mu * gains.delta * omega1);
  rep.checks.push_back(make_check("beta_lower_bound", std::max(b1, b2), gains.beta, true));
  finalize(rep);
  if (rep.pass) {
    rep.constants["u_level"] = u_level(r, fp);
    try {
      rep.constants["rates"] = to_json(decay_rates(gains, r, params, Kt, Certificate::Theorem2));
    } catch (const InvalidInput& e) {
      rep.constants["rates_error"] = e.what();
    }
  }
  return rep;
}

std::pair<double, double> select_beta_gamma(const Gains& gains, double r, double K,
                                            const PhysicalParams& params, double margin) {
  const auto fp = gains.functional();
  const LemmaConstants lc(r, params, fp, gains.sigma);
  const double phi = lc.phi_r();
  const double alpha = lc.alpha_r();
  const double p1 = lc.p1_r();
  require(phi > 0.0, "phi(r) <= 0: no valid beta");
  require(alpha > 0.0, "alpha(r) <= 0: no valid gamma");
  const double f = 1.0 + margin;
  const double gamma =
      f * 5.0 * (params.H_max * K * K + lc.eps1()) / (gains.delta * params.mu * alpha);
  const double beta_a =
      20.0 * params.L * params.H_max / (3.0 * params.mu * params.mu * gains.delta * phi);
  const double beta_b = 4.0 * params.H_max * lc.eps2() / (params.mu * gains.delta * p1 * p1 * phi) / gamma;
  return {f * std::max(beta_a, beta_b), gamma};
}

namespace {

// Largest r in [0, r_hi] for which `ok` holds, given ok(0). `ok` must be
// monotone (true then false).
template <class F>
double largest_feasible(double r_hi, F ok) {
  if (ok(r_hi)) return r_hi;
  double lo = 0.0, hi = r_hi;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * r_hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace

Suggestion suggest_gains_theorem1(double omega, const FrictionModel& friction,
                                  const PhysicalParams& params, const SuggestHints& hints) {
  Suggestion s;
  params.validate();
  validate(friction);
  require(omega > 0.0 && omega <= params.h_star(), "omega must lie in (0, h*]");
  const auto K = assumption_H_bound(friction, omega, params);
  if (!K) {
    s.reason = "Assumption (H) not satisfied by friction model \"" + friction_name(friction) + "\"";
    s.report = check_theorem1(s.gains, omega, 0.0, friction, params);
    return s;
  }
  Gains g;
  g.sigma = hints.sigma;
  g.q = hints.q;
  g.delta = std::max(hints.delta_min,
                     (1.0 + hints.margin) * params.mu * *K / (2.0 * params.g) - 1.0);
  auto fp = g.functional();
  const double R = radius_R(params, fp);
  s.r = largest_feasible(hints.r_fraction * R,
                         [&](double r) { return level_bounds_p(r, params, fp).p1 >= omega; });
  g.k = hints.k_fraction * g.q * theta(s.r, params, g.functional(), g.sigma);
  // K is non-increasing, so K(omega) bounds K(p1(r)) and keeps the selection
  // valid for every relation whose bound does not exceed the certified one.
  try {
    auto [beta, gamma] = select_beta_gamma(g, s.r, *K, params, hints.margin);
    g.beta = beta;
    g.gamma = gamma;
  } catch (const InvalidInput& e) {
    s.reason = e.what();
  }
  s.gains = g;
  s.report = check_theorem1(g, omega, s.r, friction, params);
  s.feasible = s.report.pass && s.reason.empty();
  if (!s.report.pass && s.reason.empty()) s.reason = "suggested gains failed re-check";
  return s;
}

Suggestion suggest_gains_theorem2(double omega1, double omega2, const FrictionModel& friction,
                                  const PhysicalParams& params, const SuggestHints& hints) {
  Suggestion s;
  params.validate();
  validate(friction);
  require(omega1 > 0.0 && omega1 < params.h_star(), "omega1 must lie in (0, h*)");
  require(omega2 > 0.0, "omega2 must be > 0");
  const double f = 1.0 + hints.margin;
  const double Kt = K_tilde(friction, omega1, omega2, params);
  Gains g;
  g.sigma = hints.sigma;
  g.q = hints.q;
  g.delta = std::max(hints.delta_min, f * params.mu * Kt / (2.0 * params.g) - 1.0);
  g.k = hints.k_fraction * g.q * theta_of_level(omega1, params, g.functional(), g.sigma);

  const LemmaConstants lc(0.0, params, g.functional(), g.sigma, omega1);
  const double at = *lc.alpha_tilde();
  g.gamma = f * 5.0 * (params.H_max * Kt * Kt + lc.eps1()) / (g.delta * params.mu * at);
  const double b1 = 4.0 * lc.eps2() / ((2.0 * at + params.mu * g.delta * g.gamma * omega1) * omega1 * omega1);
  const double b2 = 20.0 * params.L / (3.0 * params.mu * params.mu * g.delta * omega1);
  g.beta = f * std::max(b1, b2);

  const auto fp = g.functional();
  const double R = radius_R(params, fp);
  s.r = largest_feasible(hints.r_fraction * R, [&](double r) {
    return level_bounds_p(r, params, fp).p1 > omega1 &&
           f * std::sqrt(2.0 * params.L * u_level(r, fp) / 3.0) <= omega2;
  });
  s.gains = g;
  s.report = check_theorem2(g, omega1, omega2, s.r, friction, params);
  s.feasible = s.report.pass;
  if (!s.feasible) s.reason = "suggested gains failed re-check";
  return s;
}

DecayRates decay_rates(const Gains& gains, double r, const PhysicalParams& params, double K,
                       Certificate theorem) {
  const auto fp = gains.functional();
  const LemmaConstants lc(r, params, fp, gains.sigma);
  const double mu = params.mu;
  const double H = params.H_max;
  const double L = params.L;
  const double phi = lc.phi_r();
  const double p1 = lc.p1_r();
  const double th = lc.theta_r();
  DecayRates d;
  const double lam = lc.Lambda(r);
  if (theorem == Certificate::Theorem2) {
    d.omega = std::min({mu * params.g / 4.0, fp.q * fp.k * fp.k * fp.k, fp.q * (fp.q * th - fp.k),
                        mu * fp.delta / 2.0});
  } else {
    d.omega = std::min({mu * params.g / 4.0, mu * fp.delta * phi / (2.0 * H * p1),
                        fp.q * fp.k * fp.k * fp.k, fp.q * (fp.q * th - fp.k)});
  }
  d.lambda_V = d.omega / lam;
  d.lambda_U = std::min((fp.delta * fp.gamma * phi / H + pi * pi / (L * L)) * mu / 2.0,
                        lc.alpha_r() - 5.0 * (H * K * K + lc.eps1()) / (fp.delta * mu * fp.gamma));
  require(d.lambda_V > 0.0, "certified V rate is not positive");
  require(d.lambda_U > 0.0, "certified U rate is not positive (gamma too small)");
  d.lambda = d.lambda_V / 2.0;
  d.lambda_bar = d.lambda_U / 2.0;
  d.M = std::sqrt(lc.G1(r) * lc.G2(r));
  d.M_bar = std::sqrt(2.0 * (1.0 + fp.gamma) * (1.0 + lc.G2(r)) * std::exp(fp.beta * r));
  return d;
}

nlohmann::json to_json(const DecayRates& d) {
  return {{"omega", d.omega},   {"lambda_V", d.lambda_V}, {"lambda_U", d.lambda_U},
          {"lambda", d.lambda}, {"lambda_bar", d.lambda_bar}, {"M", d.M},
          {"M_bar", d.M_bar}};
}

}  // namespace svtank
