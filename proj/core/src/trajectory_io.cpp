#include "svtank/trajectory_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "svtank/error.hpp"

namespace svtank {

namespace {

std::ofstream open_or_throw(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

// Round-trippable doubles without iostream state juggling.
void put(std::ostream& out, double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  out << buf;
}

}  // namespace

void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
  out << "t,xi,w,V,U,E,W_energy,mass,vx_l2,spill_margin,f,K_bar\n";
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const auto& d = traj.diagnostics[k];
    const double row[] = {traj.times[k], traj.tanks[k].xi, traj.tanks[k].w, d.V, d.U, d.E, d.W,
                          d.mass, d.vx_l2, d.spill_margin, d.f, d.K_bar};
    for (std::size_t c = 0; c < std::size(row); ++c) {
      if (c) out << ',';
      put(out, row[c]);
    }
    out << '\n';
  }
}

void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path) {
  auto out = open_or_throw(path);
  write_trajectory_csv(traj, out);
}

void write_fields(const Trajectory& traj, const Grid& grid, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    auto out = open_or_throw(dir / ("field_" + std::to_string(k) + ".csv"));
    out << "x,h,v\n";
    const auto& s = traj.states[k];
    for (std::size_t i = 0; i < s.size(); ++i) {
      put(out, grid.x(i));
      out << ',';
      put(out, s.h()[i]);
      out << ',';
      put(out, s.v()[i]);
      out << '\n';
    }
  }
}

nlohmann::json trajectory_summary(const Trajectory& traj) {
  nlohmann::json j{{"termination", to_string(traj.termination)},
                   {"message", traj.message},
                   {"t_stop", traj.t_stop},
                   {"steps", traj.steps},
                   {"samples", traj.size()},
                   {"warnings", traj.warnings}};
  if (!traj.diagnostics.empty()) {
    const auto& first = traj.diagnostics.front();
    const auto& last = traj.diagnostics.back();
    j["V0"] = first.V;
    j["V_final"] = last.V;
    double drift = 0.0;
    for (const auto& d : traj.diagnostics)
      drift = std::max(drift, std::abs(d.mass - first.mass) / first.mass);
    j["max_mass_drift"] = drift;
    double min_margin = first.spill_margin;
    for (const auto& d : traj.diagnostics) min_margin = std::min(min_margin, d.spill_margin);
    j["min_spill_margin"] = min_margin;
  }
  return j;
}

void write_json(const nlohmann::json& j, const std::filesystem::path& path) {
  auto out = open_or_throw(path);
  out << j.dump(2) << '\n';
}

}  // namespace svtank
