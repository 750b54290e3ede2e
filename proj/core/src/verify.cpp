#include "svtank/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "parallel.hpp"
#include "svtank/error.hpp"
#include "svtank/sampling.hpp"

namespace svtank {

using detail::require;
using nlohmann::json;
using std::numbers::pi;

json to_json(const VerificationResult& r) {
  return {{"name", r.name},
          {"samples", r.samples},
          {"worst_margin", r.worst_margin},
          {"pass", r.pass},
          {"provenance", r.provenance},
          {"details", r.details}};
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

json params_json(const PhysicalParams& p) {
  return {{"g", p.g}, {"mu", p.mu}, {"L", p.L}, {"m", p.m}, {"H_max", p.H_max}};
}

json fp_json(const FunctionalParams& fp) {
  return {{"delta", fp.delta}, {"q", fp.q}, {"k", fp.k}, {"beta", fp.beta}, {"gamma", fp.gamma}};
}

// The level-bound sample set shared by the Lemma 1 and sandwich suites.
SampledState level_sample(const StateSampler& sampler, const FunctionalParams& fp, double R,
                          std::uint64_t seed, std::size_t i) {
  if (i == 0)
    return {TankState{}, LiquidState::equilibrium(sampler.grid(), sampler.params())};
  auto rng = substream(seed, i);
  if (i % 2 == 1) return sampler.draw(rng);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double target = u01(rng) * R;
  return sampler.draw_at_level(rng, fp, target);
}

struct Worst {
  double margin = kInf;
  std::size_t index = 0;
  void update(double m, std::size_t i) {
    if (m < margin) {
      margin = m;
      index = i;
    }
  }
};

double rel_slack(double lhs, double rhs) {
  // (rhs - lhs) normalised by the larger side; 0 when both vanish.
  const double scale = std::max(std::abs(lhs), std::abs(rhs));
  return scale > 0.0 ? (rhs - lhs) / scale : 0.0;
}

}  // namespace

VerificationResult verify_lemma1(std::size_t samples, std::uint64_t seed,
                                 const PhysicalParams& params, const FunctionalParams& fp,
                                 const Grid& grid, unsigned jobs) {
  const StateSampler sampler(params, grid);
  const double R = radius_R(params, fp);
  std::vector<double> lower(samples), upper(samples), vals(samples);
  detail::parallel_for(samples, jobs, [&](std::size_t i) {
    const auto s = level_sample(sampler, fp, R, seed, i);
    const double V = clf_V(s.tank, s.state, params, fp, grid);
    const auto b = level_bounds_p(V, params, fp);
    const auto [mn, mx] = std::minmax_element(s.state.h().begin(), s.state.h().end());
    lower[i] = *mn - b.p1;
    upper[i] = b.p2 - *mx;
    vals[i] = V;
  });
  Worst wl, wu;
  for (std::size_t i = 0; i < samples; ++i) {
    wl.update(lower[i], i);
    wu.update(upper[i], i);
  }
  VerificationResult r;
  r.name = "level_bounds";
  r.samples = samples;
  r.worst_margin = std::min(wl.margin, wu.margin);
  r.pass = r.worst_margin >= 0.0;
  r.provenance = {{"seed", seed}, {"n", grid.n()}, {"params", params_json(params)}, {"functional", fp_json(fp)}};
  r.details = {{"worst_lower_margin", wl.margin},  {"worst_lower_index", wl.index},
               {"worst_upper_margin", wu.margin},  {"worst_upper_index", wu.index},
               {"max_V", *std::max_element(vals.begin(), vals.end())}, {"R", R}};
  return r;
}

VerificationResult verify_prop1(std::size_t samples, std::uint64_t seed, double L, unsigned jobs) {
  require(L > 0.0, "L must be > 0");
  constexpr std::size_t kDense = 4001;
  const Grid dense(kDense, L);

  struct Norms {
    double sup = 0.0, d1 = 0.0, d2 = 0.0;
  };
  // Sup norm by dense sampling; L2 norms of the analytic derivatives by the
  // trapezoid rule, which is exact for these trigonometric polynomials.
  auto norms = [&](const std::vector<double>& c) {
    std::vector<double> phi(kDense, 0.0), d1(kDense, 0.0), d2(kDense, 0.0);
    for (std::size_t i = 0; i < kDense; ++i) {
      const double x = dense.x(i);
      for (std::size_t j = 0; j < c.size(); ++j) {
        const double kj = (j + 1) * pi / L;
        phi[i] += c[j] * std::sin(kj * x);
        d1[i] += c[j] * kj * std::cos(kj * x);
        d2[i] -= c[j] * kj * kj * std::sin(kj * x);
      }
    }
    Norms n;
    for (double p : phi) n.sup = std::max(n.sup, std::abs(p));
    n.d1 = std::sqrt(l2_norm_sq(d1, dense));
    n.d2 = std::sqrt(l2_norm_sq(d2, dense));
    return n;
  };

  std::vector<double> sup_margin(samples), poincare_margin(samples);
  detail::parallel_for(samples, jobs, [&](std::size_t i) {
    std::vector<double> c;
    if (i > 0) {
      auto rng = substream(seed, i);
      std::uniform_int_distribution<int> modes(1, 8);
      std::uniform_real_distribution<double> unit(-1.0, 1.0);
      c.resize(modes(rng));
      for (double& cj : c) cj = unit(rng);
    }
    const Norms n = norms(c);
    sup_margin[i] = rel_slack(n.sup, std::sqrt(L / 3.0) * n.d1);
    poincare_margin[i] = rel_slack(pi * n.d1, L * n.d2);
  });
  const Norms eig = norms({1.0});
  const double eig_rel = std::abs(pi * eig.d1 - L * eig.d2) / (L * eig.d2);

  Worst ws, wp;
  for (std::size_t i = 0; i < samples; ++i) {
    ws.update(sup_margin[i], i);
    wp.update(poincare_margin[i], i);
  }
  VerificationResult r;
  r.name = "sup_and_poincare";
  r.samples = samples;
  // Equality at the first eigenmode makes the second inequality tight, so
  // allow roundoff-sized negative slack there.
  r.worst_margin = std::min(ws.margin, wp.margin);
  r.pass = ws.margin >= 0.0 && wp.margin >= -1e-12 && eig_rel <= 1e-10;
  r.provenance = {{"seed", seed}, {"L", L}, {"dense_points", kDense}};
  r.details = {{"worst_sup_margin", ws.margin},
               {"worst_sup_index", ws.index},
               {"worst_derivative_margin", wp.margin},
               {"worst_derivative_index", wp.index},
               {"eigenmode_relative_gap", eig_rel},
               {"eigenmode_sup_ratio", eig.sup / (std::sqrt(L / 3.0) * eig.d1)}};
  return r;
}

VerificationResult verify_prop2(std::size_t samples, std::uint64_t seed,
                                const PhysicalParams& params, const FunctionalParams& fp,
                                const Grid& grid, unsigned jobs) {
  const double hs = params.h_star();
  const double eps = 0.1 * std::min(hs, params.H_max - hs) / std::sqrt(params.L);
  const double C = std::max({params.mu * params.mu / (hs - eps * std::sqrt(params.L)),
                             0.5 * (fp.delta + 1.0) * params.g,
                             0.5 * (fp.delta + 2.0) * params.H_max, fp.q,
                             1.5 * fp.q * fp.k * fp.k});
  const StateSampler sampler(params, grid);
  std::vector<double> margin(samples), radius(samples);
  detail::parallel_for(samples, jobs, [&](std::size_t i) {
    TankState tank;
    LiquidState state = LiquidState::equilibrium(grid, params);
    if (i > 0) {
      auto rng = substream(seed, i);
      const auto s = sampler.draw(rng);
      std::uniform_real_distribution<double> u01(0.0, 1.0);
      const double rho = eps * u01(rng);
      const double norm = state_norm_X(TankState{0.0, s.tank.w}, s.state, params, grid);
      const double scale = norm > 0.0 ? rho / norm : 0.0;
      std::vector<double> h(grid.n()), v(grid.n());
      for (std::size_t j = 0; j < grid.n(); ++j) {
        h[j] = hs + scale * (s.state.h()[j] - hs);
        v[j] = scale * s.state.v()[j];
      }
      state = LiquidState::projected(std::move(h), std::move(v), grid, params);
      tank = TankState{s.tank.xi, scale * s.tank.w};
    }
    radius[i] = state_norm_X(TankState{0.0, tank.w}, state, params, grid);
    const double V = clf_V(tank, state, params, fp, grid);
    const double X = state_norm_X(tank, state, params, grid);
    margin[i] = rel_slack(V, C * X * X);
  });
  Worst w;
  for (std::size_t i = 0; i < samples; ++i) w.update(margin[i], i);
  VerificationResult r;
  r.name = "quadratic_upper_bound";
  r.samples = samples;
  r.worst_margin = w.margin;
  r.pass = w.margin >= 0.0 && *std::max_element(radius.begin(), radius.end()) <= eps * (1.0 + 1e-12);
  r.provenance = {{"seed", seed}, {"n", grid.n()}, {"params", params_json(params)}, {"functional", fp_json(fp)}};
  r.details = {{"epsilon", eps}, {"constant", C}, {"worst_index", w.index},
               {"max_radius", *std::max_element(radius.begin(), radius.end())}};
  return r;
}

VerificationResult verify_sandwich(std::size_t samples, std::uint64_t seed,
                                   const PhysicalParams& params, const FunctionalParams& fp,
                                   double sigma, const Grid& grid, unsigned jobs) {
  const StateSampler sampler(params, grid);
  const LemmaConstants lc(0.0, params, fp, sigma);
  const double R = lc.R();
  std::vector<double> lo(samples, kInf), hi(samples, kInf), diss(samples, kInf);
  std::vector<char> used(samples, 0);
  detail::parallel_for(samples, jobs, [&](std::size_t i) {
    const auto s = level_sample(sampler, fp, R, seed, i);
    const double V = clf_V(s.tank, s.state, params, fp, grid);
    if (!(V < R)) return;
    used[i] = 1;
    const double X = state_norm_X(s.tank, s.state, params, grid);
    const double X2 = X * X;
    lo[i] = rel_slack(V / lc.G2(V), X2);
    hi[i] = rel_slack(X2, V * lc.G1(V));
    const auto& h = s.state.h();
    const auto hx = central_derivative(h, grid);
    const auto vx = central_derivative(s.state.v(), grid);
    std::vector<double> hvx(h.size());
    for (std::size_t j = 0; j < h.size(); ++j) hvx[j] = h[j] * vx[j] * vx[j];
    const double z = s.tank.w + fp.k * s.tank.xi;
    const double D = l2_norm_sq(hx, grid) + trapezoid_integral(hvx, grid) +
                     s.tank.xi * s.tank.xi + z * z;
    diss[i] = rel_slack(V / lc.Lambda(V), D);
  });
  Worst wl, wh, wd;
  std::size_t count = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    if (!used[i]) continue;
    ++count;
    wl.update(lo[i], i);
    wh.update(hi[i], i);
    wd.update(diss[i], i);
  }
  VerificationResult r;
  r.name = "norm_equivalence_and_dissipation";
  r.samples = count;
  r.worst_margin = std::min({wl.margin, wh.margin, wd.margin});
  r.pass = count > 0 && r.worst_margin >= 0.0;
  r.provenance = {{"seed", seed}, {"n", grid.n()}, {"drawn", samples}, {"params", params_json(params)}, {"functional", fp_json(fp)}};
  r.details = {{"worst_lower_sandwich_margin", wl.margin}, {"worst_upper_sandwich_margin", wh.margin},
               {"worst_dissipation_margin", wd.margin}, {"R", R}};
  return r;
}

VerificationResult verify_lemma2(const Trajectory& traj, const Gains& gains,
                                 const FrictionModel& friction, const PhysicalParams& params,
                                 const Grid& grid) {
  require(traj.states.size() == traj.size(), "energy balance needs recorded states");
  require(traj.size() >= 5, "energy balance needs at least 5 samples");
  const double tau = traj.times[1] - traj.times[0];
  const double mean_dt = traj.steps > 0 ? traj.t_stop / static_cast<double>(traj.steps) : tau;
  require(tau <= 10.0 * mean_dt * (1.0 + 1e-9),
          "trajectory too coarsely sampled for the energy balance (output_every > 10 dt)");

  const std::size_t n = grid.n();
  std::vector<double> rhsE(traj.size()), rhsW(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const auto& s = traj.states[k];
    const auto& h = s.h();
    const auto& v = s.v();
    const auto hx = central_derivative(h, grid);
    const auto vx = central_derivative(v, grid);
    std::vector<double> a(n), b(n), c(n), d(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double kap = kappa(friction, h[i], v[i]);
      a[i] = h[i] * vx[i] * vx[i];
      b[i] = h[i] * v[i];
      c[i] = kap * v[i] * v[i];
      d[i] = hx[i] * kap * v[i] / h[i];
    }
    const double f = traj.diagnostics[k].f;
    const double momentum = trapezoid_integral(b, grid);
    const double fric = trapezoid_integral(c, grid);
    rhsE[k] = -params.mu * trapezoid_integral(a, grid) + f * momentum - fric;
    rhsW[k] = -params.mu * params.g * l2_norm_sq(hx, grid) +
              f * (momentum + params.mu * (h.back() - h.front())) - fric -
              params.mu * trapezoid_integral(d, grid);
  }
  (void)gains;

  double errE = 0.0, errW = 0.0, scaleE = 0.0, scaleW = 0.0;
  std::size_t used = 0;
  for (std::size_t k = 2; k + 2 < traj.size(); ++k) {
    bool uniform = true;
    for (std::size_t m = k - 2; m < k + 2; ++m)
      uniform = uniform && std::abs(traj.times[m + 1] - traj.times[m] - tau) <= 1e-9 * tau;
    if (!uniform) continue;
    auto fd = [&](auto get) {
      return (-get(k + 2) + 8.0 * get(k + 1) - 8.0 * get(k - 1) + get(k - 2)) / (12.0 * tau);
    };
    const double dE = fd([&](std::size_t m) { return traj.diagnostics[m].E; });
    const double dW = fd([&](std::size_t m) { return traj.diagnostics[m].W; });
    errE = std::max(errE, std::abs(dE - rhsE[k]));
    errW = std::max(errW, std::abs(dW - rhsW[k]));
    scaleE = std::max(scaleE, std::abs(rhsE[k]));
    scaleW = std::max(scaleW, std::abs(rhsW[k]));
    ++used;
  }
  const double relE = scaleE > 0.0 ? errE / scaleE : errE;
  const double relW = scaleW > 0.0 ? errW / scaleW : errW;
  const double ref = 399.0 * grid.dx() / grid.L();
  const double tol = 0.01 * ref * ref;

  VerificationResult r;
  r.name = "energy_balance";
  r.samples = used;
  r.worst_margin = tol - std::max(relE, relW);
  r.pass = used > 0 && relE <= tol && relW <= tol;
  r.provenance = {{"n", n}, {"output_every", tau}, {"friction", to_json(friction)},
                  {"params", params_json(params)}};
  r.details = {{"relative_error_E", relE}, {"relative_error_W", relW}, {"tolerance", tol},
               {"max_abs_dE_rhs", scaleE}, {"max_abs_dW_rhs", scaleW}};
  return r;
}

VerificationResult verify_lemma2_convergence(const VerificationResult& coarse,
                                             const VerificationResult& fine) {
  auto ratio = [&](const char* key) {
    const double c = coarse.details.at(key).get<double>();
    const double f = fine.details.at(key).get<double>();
    return f > 0.0 ? c / f : kInf;
  };
  const double rE = ratio("relative_error_E");
  const double rW = ratio("relative_error_W");
  auto in_band = [](double x) { return x >= 3.5 && x <= 4.5; };
  VerificationResult r;
  r.name = "energy_balance_convergence";
  r.samples = coarse.samples + fine.samples;
  r.worst_margin = std::min({rE - 3.5, 4.5 - rE, rW - 3.5, 4.5 - rW});
  r.pass = in_band(rE) && in_band(rW);
  r.provenance = {{"coarse", coarse.provenance}, {"fine", fine.provenance}};
  r.details = {{"ratio_E", rE}, {"ratio_W", rW}, {"coarse", coarse.details}, {"fine", fine.details}};
  return r;
}

std::optional<double> fit_decay_rate(const std::vector<double>& t, const std::vector<double>& y) {
  require(t.size() == y.size(), "fit_decay_rate: size mismatch");
  if (y.empty()) return std::nullopt;
  const double ref = y.front() > 0.0 ? y.front() : *std::max_element(y.begin(), y.end());
  if (!(ref > 0.0)) return std::nullopt;
  const std::size_t skip = y.size() / 20;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t cnt = 0;
  for (std::size_t k = skip; k < y.size(); ++k) {
    if (!(y[k] > 1e-10 * ref)) continue;
    const double ly = std::log(y[k]);
    sx += t[k];
    sy += ly;
    sxx += t[k] * t[k];
    sxy += t[k] * ly;
    ++cnt;
  }
  if (cnt < 3) return std::nullopt;
  const double c = static_cast<double>(cnt);
  const double den = c * sxx - sx * sx;
  if (!(den > 0.0)) return std::nullopt;
  return -(c * sxy - sx * sy) / den;
}

VerificationResult verify_decay(const Trajectory& traj, const FeasibilityReport& report,
                                const PhysicalParams& params, const Grid& grid) {
  require(traj.size() >= 1, "decay check needs a non-empty trajectory");
  require(traj.states.size() == traj.size(), "decay check needs recorded states");
  VerificationResult res;
  res.name = "decay";
  res.samples = traj.size();
  const Gains& gains = report.gains;
  const auto fp = gains.functional();
  const bool general = report.theorem == Certificate::Theorem2;
  const double r = report.r;

  std::string status = "certified";
  std::optional<DecayRates> rates;
  if (!report.pass) {
    status = "refused: gains not certified";
  } else {
    double K = 0.0;
    if (report.constants.contains("K_omega")) K = report.constants["K_omega"].get<double>();
    if (report.constants.contains("K_tilde")) K = report.constants["K_tilde"].get<double>();
    try {
      rates = decay_rates(gains, r, params, K, report.theorem);
    } catch (const InvalidInput& e) {
      status = std::string("refused: ") + e.what();
    }
  }
  const double level = general ? u_level(r, fp) : r;
  const auto& d0 = traj.diagnostics.front();
  const double start = general ? d0.U : d0.V;
  if (rates && !(start <= level)) status = "refused: initial state outside the certified set";
  const bool certified = status == "certified";

  json clauses = json::object();
  double worst = kInf;
  bool all = true;
  auto clause = [&](const char* name, bool ok, double margin, json extra) {
    extra["pass"] = ok;
    extra["margin"] = margin;
    clauses[name] = std::move(extra);
    worst = std::min(worst, margin);
    all = all && ok;
  };

  // (i) monotone decrease of the certified functional.
  double uptick = 0.0;
  for (std::size_t k = 1; k < traj.size(); ++k) {
    const double a = general ? traj.diagnostics[k - 1].U : traj.diagnostics[k - 1].V;
    const double b = general ? traj.diagnostics[k].U : traj.diagnostics[k].V;
    const double rel = a > 0.0 ? (b - a) / a : (b > 0.0 ? kInf : 0.0);
    uptick = std::max(uptick, rel);
  }
  clause("nonincreasing", uptick <= 1e-8, 1e-8 - uptick,
         {{"functional", general ? "U" : "V"}, {"max_relative_uptick", uptick}});

  // (ii) membership in the certified sublevel set.
  double peak = 0.0;
  for (const auto& d : traj.diagnostics) peak = std::max(peak, general ? d.U : d.V);
  clause("sublevel_membership", peak <= level * (1.0 + 1e-8),
         level > 0.0 ? (level - peak) / level : -peak, {{"level", level}, {"max", peak}});

  // (iii) no spill.
  double min_margin = kInf;
  for (const auto& d : traj.diagnostics) min_margin = std::min(min_margin, d.spill_margin);
  clause("spill_margin", min_margin > 0.0, min_margin / params.H_max,
         {{"min_spill_margin", min_margin}});

  // (iv) fitted rates.
  std::vector<double> Vs, vx2;
  for (const auto& d : traj.diagnostics) {
    Vs.push_back(d.V);
    vx2.push_back(d.vx_l2 * d.vx_l2);
  }
  const auto fitV = fit_decay_rate(traj.times, Vs);
  const auto fitvx = fit_decay_rate(traj.times, vx2);
  if (rates) {
    const double needV = 0.95 * rates->lambda_V;
    const double needU = 0.95 * rates->lambda_U;
    clause("rate_V", !fitV || *fitV >= needV, fitV ? (*fitV - needV) / needV : 0.0,
           {{"fitted", fitV ? json(*fitV) : json(nullptr)}, {"certified", rates->lambda_V}});
    clause("rate_vx", !fitvx || *fitvx >= needU, fitvx ? (*fitvx - needU) / needU : 0.0,
           {{"fitted", fitvx ? json(*fitvx) : json(nullptr)}, {"certified", rates->lambda_U}});

    // (v) state-norm estimate and (vi) |v_x| estimate with constructive constants.
    const double X0 = state_norm_X(traj.tanks.front(), traj.states.front(), params, grid);
    const double vx0 = d0.vx_l2;
    double worst_state = kInf, worst_vx = kInf;
    for (std::size_t k = 0; k < traj.size(); ++k) {
      const double t = traj.times[k];
      const double X = state_norm_X(traj.tanks[k], traj.states[k], params, grid);
      worst_state = std::min(worst_state, rel_slack(X, rates->M * std::exp(-rates->lambda * t) * X0));
      const double vx_sq = traj.diagnostics[k].vx_l2 * traj.diagnostics[k].vx_l2;
      const double bound = rates->M_bar * rates->M_bar * std::exp(-rates->lambda_U * t) *
                           (X0 * X0 + vx0 * vx0);
      worst_vx = std::min(worst_vx, rel_slack(vx_sq, bound));
    }
    clause("state_norm_estimate", worst_state >= 0.0, worst_state, {{"M", rates->M}, {"lambda", rates->lambda}});
    clause("vx_estimate", worst_vx >= 0.0, worst_vx, {{"M_bar", rates->M_bar}, {"lambda_bar", rates->lambda_bar}});
  } else {
    clauses["rate_V"] = {{"fitted", fitV ? json(*fitV) : json(nullptr)}};
    clauses["rate_vx"] = {{"fitted", fitvx ? json(*fitvx) : json(nullptr)}};
  }

  // (vii) sup-norm cap on the velocity under the general certificate.
  if (general) {
    const double cap = std::sqrt(2.0 * params.L * level / 3.0);
    double vmax = 0.0;
    for (const auto& s : traj.states)
      for (double v : s.v()) vmax = std::max(vmax, std::abs(v));
    clause("velocity_cap", vmax <= cap, cap > 0.0 ? (cap - vmax) / cap : -vmax,
           {{"cap", cap}, {"max_abs_v", vmax}});
  }

  if (!traj.completed()) {
    clause("run_completed", false, -1.0, {{"termination", to_string(traj.termination)}});
  }

  res.worst_margin = worst;
  res.pass = certified && all;
  res.provenance = {{"theorem", to_string(report.theorem)}, {"r", r}, {"gains", to_json(gains)},
                    {"params", params_json(params)}};
  res.details = {{"status", status}, {"clauses", clauses}};
  if (!certified) res.details["note"] = "clauses recorded as observations only";
  if (rates) res.details["rates"] = to_json(*rates);
  return res;
}

}  // namespace svtank
