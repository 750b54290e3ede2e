#include "svtank/friction.hpp"

#include <algorithm>
#include <cmath>

#include "svtank/error.hpp"

namespace svtank {

using detail::require;

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double golden_max(const std::function<double(double)>& f, double a, double b, double tol) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  return std::max({f(a), f(b), fc, fd});
}

// Box maximum for relations we cannot treat analytically: dense 401 x 401
// scan followed by golden-section refinement along each axis around the best
// node.
double generic_box_max(const std::function<double(double, double)>& g, double h_lo, double h_hi,
                       double v_hi) {
  constexpr int kN = 401;
  double best = -1.0;
  int bi = 0, bj = 0;
  for (int i = 0; i < kN; ++i) {
    const double h = h_lo + (h_hi - h_lo) * i / (kN - 1);
    for (int j = 0; j < kN; ++j) {
      const double v = -v_hi + 2.0 * v_hi * j / (kN - 1);
      const double val = g(h, v);
      if (val > best) {
        best = val;
        bi = i;
        bj = j;
      }
    }
  }
  const double dh = (h_hi - h_lo) / (kN - 1);
  const double dv = 2.0 * v_hi / (kN - 1);
  double h0 = h_lo + dh * bi;
  double v0 = -v_hi + dv * bj;
  for (int sweep = 0; sweep < 3; ++sweep) {
    const double ha = std::max(h_lo, h0 - dh), hb = std::min(h_hi, h0 + dh);
    double hbest = h0, vbest = v0;
    const double along_h = golden_max(
        [&](double h) {
          const double val = g(h, v0);
          if (val >= g(hbest, v0)) hbest = h;
          return val;
        },
        ha, hb, 1e-10);
    best = std::max(best, along_h);
    h0 = hbest;
    const double va = std::max(-v_hi, v0 - dv), vb = std::min(v_hi, v0 + dv);
    const double along_v = golden_max(
        [&](double v) {
          const double val = g(h0, v);
          if (val >= g(h0, vbest)) vbest = v;
          return val;
        },
        va, vb, 1e-10);
    best = std::max(best, along_v);
    v0 = vbest;
  }
  return best;
}

}  // namespace

void validate(const FrictionModel& model) {
  std::visit(overloaded{
                 [](const friction::Frictionless&) {},
                 [](const friction::ConstAbsV& m) { require(m.c_f >= 0.0, "c_f must be >= 0"); },
                 [](const friction::LinearLevel& m) {
                   require(m.r0 >= 0.0 && m.r1 >= 0.0, "r0, r1 must be >= 0");
                 },
                 [](const friction::ChannelWidth& m) {
                   require(m.r >= 0.0, "r must be >= 0");
                   require(m.b > 0.0, "channel width b must be > 0");
                 },
                 [](const friction::VelocityIndependent& m) {
                   require(m.c > 0.0, "c must be > 0");
                   require(m.mu > 0.0, "velocity-independent friction needs mu > 0");
                 },
                 [](const friction::BoundedGeneric& m) {
                   require(m.B > 0.0, "bound B must be > 0");
                   require(static_cast<bool>(m.kappa), "bounded friction needs a relation");
                 },
             },
             model);
}

std::string friction_name(const FrictionModel& model) {
  return std::visit(overloaded{
                        [](const friction::Frictionless&) { return std::string("none"); },
                        [](const friction::ConstAbsV&) { return std::string("const_abs_v"); },
                        [](const friction::LinearLevel&) { return std::string("linear_level"); },
                        [](const friction::ChannelWidth&) { return std::string("channel_width"); },
                        [](const friction::VelocityIndependent&) {
                          return std::string("velocity_independent");
                        },
                        [](const friction::BoundedGeneric&) { return std::string("bounded"); },
                    },
                    model);
}

double kappa(const FrictionModel& model, double h, double v) {
  require(h > 0.0, "kappa needs h > 0");
  return std::visit(
      overloaded{
          [](const friction::Frictionless&) { return 0.0; },
          [&](const friction::ConstAbsV& m) { return m.c_f * std::abs(v); },
          [&](const friction::LinearLevel& m) { return m.r0 + m.r1 * h * std::abs(v); },
          [&](const friction::ChannelWidth& m) {
            return m.r * std::pow(h, -1.0 / 3.0) * std::pow(m.b + 2.0 * h, 4.0 / 3.0) * std::abs(v);
          },
          [&](const friction::VelocityIndependent& m) {
            return 3.0 * m.mu * m.c / (3.0 * m.mu + 4.0 * m.c * h);
          },
          [&](const friction::BoundedGeneric& m) { return m.kappa(h, v); },
      },
      model);
}

std::optional<double> assumption_H_bound(const FrictionModel& model, double omega,
                                         const PhysicalParams& params) {
  require(omega > 0.0 && omega <= params.h_star(), "omega must lie in (0, h*]");
  return std::visit(
      overloaded{
          [](const friction::Frictionless&) -> std::optional<double> { return 0.0; },
          [](const friction::ConstAbsV& m) -> std::optional<double> {
            if (m.c_f == 0.0) return 0.0;
            return std::nullopt;
          },
          [&](const friction::LinearLevel& m) -> std::optional<double> {
            if (m.r1 == 0.0) return m.r0 / (omega * omega);
            return std::nullopt;
          },
          [](const friction::ChannelWidth& m) -> std::optional<double> {
            if (m.r == 0.0) return 0.0;
            return std::nullopt;
          },
          [&](const friction::VelocityIndependent& m) -> std::optional<double> {
            return 3.0 * m.mu * m.c / (omega * omega * (3.0 * m.mu + 4.0 * m.c * omega));
          },
          [&](const friction::BoundedGeneric& m) -> std::optional<double> {
            return m.B / (omega * omega);
          },
      },
      model);
}

double K_tilde(const FrictionModel& model, double omega1, double omega2,
               const PhysicalParams& params) {
  require(omega1 > 0.0 && omega1 < params.h_star(), "omega1 must lie in (0, h*)");
  require(omega2 > 0.0, "omega2 must be > 0");
  const double H = params.H_max;
  return std::visit(
      overloaded{
          [](const friction::Frictionless&) { return 0.0; },
          // Each built-in relation is non-increasing in h after division by
          // h^2 and non-decreasing in |v|, so the box corner (omega1, omega2)
          // attains the maximum.
          [&](const friction::ConstAbsV& m) { return m.c_f * omega2 / (omega1 * omega1); },
          [&](const friction::LinearLevel& m) {
            return m.r0 / (omega1 * omega1) + m.r1 * omega2 / omega1;
          },
          [&](const friction::ChannelWidth& m) {
            return m.r * std::pow(m.b + 2.0 * omega1, 4.0 / 3.0) * std::pow(omega1, -7.0 / 3.0) *
                   omega2;
          },
          [&](const friction::VelocityIndependent& m) {
            return 3.0 * m.mu * m.c / (omega1 * omega1 * (3.0 * m.mu + 4.0 * m.c * omega1));
          },
          [&](const friction::BoundedGeneric& m) {
            return generic_box_max([&](double h, double v) { return m.kappa(h, v) / (h * h); },
                                   omega1, H, omega2);
          },
      },
      model);
}

double K_bar(const FrictionModel& model, const LiquidState& state) {
  const auto& h = state.h();
  const auto& v = state.v();
  double best = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) best = std::max(best, kappa(model, h[i], v[i]) / (h[i] * h[i]));
  return best;
}

friction::BoundedGeneric make_bounded_tanh(double B, double v_scale) {
  require(v_scale > 0.0, "v_scale must be > 0");
  return friction::BoundedGeneric{
      B, [B, v_scale](double, double v) { return B * std::tanh(std::abs(v) / v_scale); },
      "tanh"};
}

friction::BoundedGeneric make_bounded_constant(double B) {
  return friction::BoundedGeneric{B, [B](double, double) { return B; }, "constant"};
}

FrictionModel friction_from_json(const nlohmann::json& j, const PhysicalParams& params) {
  require(j.is_object() && j.contains("type"), "friction spec needs a \"type\" field");
  const std::string type = j.at("type").get<std::string>();
  auto num = [&](const char* key, double fallback) {
    return j.contains(key) ? j.at(key).get<double>() : fallback;
  };
  auto need = [&](const char* key) {
    require(j.contains(key), "friction \"" + type + "\" needs \"" + key + "\"");
    return j.at(key).get<double>();
  };
  FrictionModel model;
  if (type == "none") {
    model = friction::Frictionless{};
  } else if (type == "const_abs_v") {
    model = friction::ConstAbsV{need("c_f")};
  } else if (type == "linear_level") {
    model = friction::LinearLevel{need("r0"), num("r1", 0.0)};
  } else if (type == "channel_width") {
    model = friction::ChannelWidth{need("r"), need("b")};
  } else if (type == "velocity_independent") {
    model = friction::VelocityIndependent{need("c"), params.mu};
  } else if (type == "bounded") {
    const double B = need("B");
    const std::string profile = j.value("profile", std::string("tanh"));
    if (profile == "tanh") {
      model = make_bounded_tanh(B, num("v_scale", 0.1));
    } else if (profile == "constant") {
      model = make_bounded_constant(B);
    } else {
      throw InvalidInput("unknown bounded friction profile \"" + profile + "\"");
    }
  } else {
    throw InvalidInput("unknown friction type \"" + type + "\"");
  }
  validate(model);
  return model;
}

nlohmann::json to_json(const FrictionModel& model) {
  return std::visit(
      overloaded{
          [](const friction::Frictionless&) { return nlohmann::json{{"type", "none"}}; },
          [](const friction::ConstAbsV& m) {
            return nlohmann::json{{"type", "const_abs_v"}, {"c_f", m.c_f}};
          },
          [](const friction::LinearLevel& m) {
            return nlohmann::json{{"type", "linear_level"}, {"r0", m.r0}, {"r1", m.r1}};
          },
          [](const friction::ChannelWidth& m) {
            return nlohmann::json{{"type", "channel_width"}, {"r", m.r}, {"b", m.b}};
          },
          [](const friction::VelocityIndependent& m) {
            return nlohmann::json{{"type", "velocity_independent"}, {"c", m.c}};
          },
          [](const friction::BoundedGeneric& m) {
            return nlohmann::json{{"type", "bounded"}, {"B", m.B}, {"profile", m.label}};
          },
      },
      model);
}

}  // namespace svtank
