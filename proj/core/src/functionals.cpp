#include "svtank/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "svtank/error.hpp"

namespace svtank {

using detail::require;
using std::numbers::pi;

void FunctionalParams::validate() const {
  require(std::isfinite(delta) && delta > 0.0, "delta must be > 0");
  require(std::isfinite(q) && q > 0.0, "q must be > 0");
  require(std::isfinite(k) && k > 0.0, "k must be > 0");
  require(std::isfinite(beta) && beta > 0.0, "beta must be > 0");
  require(std::isfinite(gamma) && gamma > 0.0, "gamma must be > 0");
}

namespace {

double potential_term(const std::vector<double>& h, const PhysicalParams& params,
                      const Grid& grid) {
  const double hs = params.h_star();
  std::vector<double> dev(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) dev[i] = h[i] - hs;
  return 0.5 * params.g * l2_norm_sq(dev, grid);
}

void check_grid(const LiquidState& state, const Grid& grid) {
  require(state.size() == grid.n(), "state does not match grid");
}

}  // namespace

double energy_E(const LiquidState& state, const PhysicalParams& params, const Grid& grid) {
  check_grid(state, grid);
  const auto& h = state.h();
  const auto& v = state.v();
  std::vector<double> kin(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) kin[i] = h[i] * v[i] * v[i];
  return 0.5 * trapezoid_integral(kin, grid) + potential_term(h, params, grid);
}

double energy_W(const LiquidState& state, const PhysicalParams& params, const Grid& grid) {
  check_grid(state, grid);
  const auto& h = state.h();
  const auto& v = state.v();
  const auto hx = central_derivative(h, grid);
  std::vector<double> integrand(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double phi = h[i] * v[i] + params.mu * hx[i];
    integrand[i] = phi * phi / h[i];
  }
  return 0.5 * trapezoid_integral(integrand, grid) + potential_term(h, params, grid);
}

double clf_V(const TankState& tank, const LiquidState& state, const PhysicalParams& params,
             const FunctionalParams& fp, const Grid& grid) {
  const double z = tank.w + fp.k * tank.xi;
  return fp.delta * energy_E(state, params, grid) + energy_W(state, params, grid) +
         0.5 * fp.q * fp.k * fp.k * tank.xi * tank.xi + 0.5 * fp.q * z * z;
}

double vx_l2_sq(const LiquidState& state, const Grid& grid) {
  check_grid(state, grid);
  return l2_norm_sq(central_derivative(state.v(), grid), grid);
}

double functional_U_from(double V, double vx_sq, const FunctionalParams& fp) {
  return V + (0.5 * vx_sq + fp.gamma * V) * std::exp(fp.beta * V);
}

double functional_U(const TankState& tank, const LiquidState& state, const PhysicalParams& params,
                    const FunctionalParams& fp, const Grid& grid) {
  return functional_U_from(clf_V(tank, state, params, fp, grid), vx_l2_sq(state, grid), fp);
}

double G_of_h(double h, const PhysicalParams& params) {
  const double hs = params.h_star();
  const double shs = std::sqrt(hs);
  if (h <= 0.0) return h - (4.0 / 3.0) * hs * shs;
  if (h == hs) return 0.0;
  // (2/3) h^{3/2} - 2 h* h^{1/2} + (4/3) h*^{3/2} factored as
  // (sqrt h - sqrt h*)^2 (2/3 sqrt h + 4/3 sqrt h*), free of cancellation near h*.
  const double sh = std::sqrt(h);
  const double d = (h - hs) / (sh + shs);
  const double mag = d * d * ((2.0 / 3.0) * sh + (4.0 / 3.0) * shs);
  return h > hs ? mag : -mag;
}

double G_derivative(double h, const PhysicalParams& params) {
  require(h > 0.0, "G_derivative needs h > 0");
  return std::abs(h - params.h_star()) / std::sqrt(h);
}

double G_inverse(double y, const PhysicalParams& params) {
  const double hs = params.h_star();
  const double floor_value = -(4.0 / 3.0) * hs * std::sqrt(hs);
  if (y == 0.0) return hs;
  if (y <= floor_value) return y - floor_value;

  // Bracket [lo, hi] strictly on one side of h*, where G is smooth and monotone.
  double lo, hi;
  if (y > 0.0) {
    lo = hs;
    hi = 2.0 * hs;
    while (G_of_h(hi, params) < y) {
      lo = hi;
      hi *= 2.0;
    }
  } else {
    lo = 0.0;
    hi = hs;
  }

  // Bisection until the bracket excludes both singular points (h = 0, where
  // G' blows up, and h = h*, where G' vanishes), then safeguarded Newton.
  auto newton_ready = [&] { return y > 0.0 ? lo > hs : (lo > 0.0 && hi < hs); };
  int iter = 0;
  while (!newton_ready() && iter < 200) {
    const double mid = 0.5 * (lo + hi);
    (G_of_h(mid, params) < y ? lo : hi) = mid;
    ++iter;
  }
  double h = 0.5 * (lo + hi);
  for (; iter < 400; ++iter) {
    const double gval = G_of_h(h, params) - y;
    if (gval == 0.0) return h;
    (gval < 0.0 ? lo : hi) = h;
    const double slope = G_derivative(h, params);
    double next = h - gval / slope;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - h) <= 1e-15 * std::abs(h) || hi - lo <= 2e-16 * hi) return next;
    h = next;
  }
  return h;
}

LevelBounds level_bounds_p(double s, const PhysicalParams& params, const FunctionalParams& fp) {
  require(s >= 0.0 && std::isfinite(s), "level_bounds_p needs s >= 0");
  const double hs = params.h_star();
  const double c = 1.0 / (params.mu * std::sqrt(fp.delta * params.g));
  const double spread = std::sqrt(2.0 * params.m * (1.0 + fp.delta) / fp.delta) / params.mu *
                        std::sqrt(s);
  if (s == 0.0) return {hs, hs};
  return {std::max(G_inverse(-c * s, params), hs - spread),
          std::min(G_inverse(c * s, params), hs + spread)};
}

double positivity_threshold(const PhysicalParams& params, const FunctionalParams& fp) {
  const double hs = params.h_star();
  const double d = fp.delta;
  return params.mu * hs *
         std::max((4.0 / 3.0) * std::sqrt(d * params.g * hs),
                  params.mu * d / (2.0 * params.L * (1.0 + d)));
}

double radius_R(const PhysicalParams& params, const FunctionalParams& fp) {
  const double hs = params.h_star();
  const double H = params.H_max;
  require(hs < H, "radius_R needs h* < H_max");
  const double d = fp.delta;
  const double mu = params.mu;
  const double g = params.g;
  const double m = params.m;
  const double zeta1 =
      std::max(std::sqrt(H / hs) - 2.0 * std::sqrt(hs / H),
               3.0 * mu * std::sqrt(d) * (H - hs) / (4.0 * m * (1.0 + d) * std::sqrt(g * hs)));
  const double zeta2 =
      hs / (H - hs) * std::max(2.0, 3.0 * mu * std::sqrt(d * hs) / (4.0 * m * (1.0 + d) * std::sqrt(g)));
  return 2.0 * mu * std::sqrt(d * g * hs) / 3.0 * (H - hs) * std::min(zeta1, zeta2);
}

double theta_of_level(double level, const PhysicalParams& params, const FunctionalParams& fp,
                      double sigma) {
  require(level > 0.0, "theta needs a positive level bound");
  require(sigma > 0.0, "sigma must be > 0");
  const double d = fp.delta;
  const double num = params.g * params.mu * d * pi * pi * level;
  const double den =
      num + 2.0 * sigma * params.L *
                (params.m * params.g * params.L * params.H_max * (d + 1.0) * (d + 1.0) +
                 2.0 * params.mu * params.mu * d * pi * pi * level);
  return sigma * num / den;
}

double theta(double r, const PhysicalParams& params, const FunctionalParams& fp, double sigma) {
  const double p1 = level_bounds_p(r, params, fp).p1;
  require(p1 > 0.0, "theta: p1(r) <= 0, r is too large");
  return theta_of_level(p1, params, fp, sigma);
}

LemmaConstants::LemmaConstants(double r, const PhysicalParams& params, const FunctionalParams& fp,
                               double sigma, std::optional<double> omega1)
    : params_(params), fp_(fp), sigma_(sigma), r_(r) {
  params.validate();
  fp.validate();
  R_ = radius_R(params, fp);
  require(r >= 0.0 && r < R_, "lemma constants need r in [0, R)");
  p1_r_ = level_bounds_p(r, params, fp).p1;
  theta_r_ = theta_of_level(p1_r_, params, fp, sigma);

  const double d = fp.delta;
  const double mu = params.mu;
  const double g = params.g;
  const double H = params.H_max;
  const double L = params.L;
  eps1_ = (d + 1.0) * g * g / (mu * mu) * H +
          3.0 * sigma * sigma * L * ((d + 1.0) * (d + 2.0) * params.m + d * fp.q);
  eps2_ = 100.0 * (d + 1.0) * (d + 1.0) * R_ / (d * d * mu * mu * mu);

  if (omega1) {
    const double w1 = *omega1;
    require(w1 > 0.0, "omega1 must be > 0");
    theta_tilde_ = theta_of_level(w1, params, fp, sigma);
    const double q = fp.q;
    const double k = fp.k;
    const double num = std::min({mu * g, 4.0 * q * k * k * k, 4.0 * q * (q * *theta_tilde_ - k), mu * d});
    const double den = 2.0 * std::max({L * L * (d + 2.0) * H / (pi * pi * w1),
                                       (d + 1.0) * g * L * L + 2.0 * mu * mu / w1, q * k * k, q});
    alpha_tilde_ = num / den;
  }
}

double LemmaConstants::Lambda(double s) const {
  const auto b = level_bounds_p(s, params_, fp_);
  const double d = fp_.delta;
  const double L = params_.L;
  return 0.5 * std::max({L * L * (d + 2.0) * b.p2 / (pi * pi * b.p1),
                         (d + 1.0) * params_.g * L * L + 2.0 * params_.mu * params_.mu / b.p1,
                         fp_.q * fp_.k * fp_.k, fp_.q});
}

double LemmaConstants::G2(double s) const {
  const double p1 = level_bounds_p(s, params_, fp_).p1;
  const double d = fp_.delta;
  return std::max({0.5 * (d + 2.0) * params_.H_max, 0.5 * (d + 1.0) * params_.g,
                   params_.mu * params_.mu / p1, 1.5 * fp_.q * fp_.k * fp_.k, fp_.q});
}

double LemmaConstants::G1(double s) const {
  const double p1 = level_bounds_p(s, params_, fp_).p1;
  const double d = fp_.delta;
  const double mn = std::min({0.5 * d * p1, params_.g * (d + 1.0),
                              d * params_.mu * params_.mu / (params_.H_max * (d + 2.0)),
                              0.5 * fp_.q * fp_.k * fp_.k, fp_.q / 3.0});
  return 2.0 / mn;
}

double LemmaConstants::phi(double s) const {
  const auto b = level_bounds_p(s, params_, fp_);
  return 2.0 * params_.H_max * b.p1 - p1_r_ * b.p2;
}

double LemmaConstants::alpha(double s) const {
  const auto b = level_bounds_p(s, params_, fp_);
  const double q = fp_.q;
  const double k = fp_.k;
  const double H = params_.H_max;
  const double mn = std::min({0.25 * params_.mu * params_.g, q * k * k * k, q * (q * theta_r_ - k),
                              params_.mu * fp_.delta / (4.0 * H) * (2.0 * H - p1_r_ * b.p2 / b.p1)});
  return mn / Lambda(s);
}

double u_level(double r, const FunctionalParams& fp) {
  return r + fp.gamma * r * std::exp(fp.beta * r);
}

LyapunovReport evaluate_lyapunov(const TankState& tank, const LiquidState& state,
                                 const PhysicalParams& params, const FunctionalParams& fp,
                                 const Grid& grid, double r) {
  LyapunovReport rep;
  rep.E = energy_E(state, params, grid);
  rep.W = energy_W(state, params, grid);
  const double z = tank.w + fp.k * tank.xi;
  rep.V = fp.delta * rep.E + rep.W + 0.5 * fp.q * fp.k * fp.k * tank.xi * tank.xi +
          0.5 * fp.q * z * z;
  const double vx_sq = vx_l2_sq(state, grid);
  rep.vx_l2 = std::sqrt(vx_sq);
  rep.U = functional_U_from(rep.V, vx_sq, fp);
  const auto b = level_bounds_p(rep.V, params, fp);
  rep.p1_of_V = b.p1;
  rep.p2_of_V = b.p2;
  rep.R = radius_R(params, fp);
  rep.in_XV_r = rep.V <= r;
  rep.in_XU_r = rep.U <= u_level(r, fp);
  return rep;
}

nlohmann::json to_json(const LyapunovReport& r) {
  return nlohmann::json{{"e", r.E},
                        {"w", r.W},
                        {"v", r.V},
                        {"u", r.U},
                        {"p1_of_v", r.p1_of_V},
                        {"p2_of_v", r.p2_of_V},
                        {"spill_radius", r.R},
                        {"in_xv_r", r.in_XV_r},
                        {"in_xu_r", r.in_XU_r},
                        {"vx_l2", r.vx_l2}};
}

}  // namespace svtank
