#pragma once

#include <filesystem>
#include <iosfwd>

#include "json.hpp"
#include "svtank/solver.hpp"

namespace svtank {

/// Header: t,xi,w,V,U,E,W_energy,mass,vx_l2,spill_margin,f,K_bar
void write_trajectory_csv(const Trajectory& traj, std::ostream& out);
void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path);

/// One CSV per recorded snapshot (x,h,v), named field_<index>.csv.
void write_fields(const Trajectory& traj, const Grid& grid, const std::filesystem::path& dir);

/// Termination reason, step count, warnings and the final diagnostics.
nlohmann::json trajectory_summary(const Trajectory& traj);

void write_json(const nlohmann::json& j, const std::filesystem::path& path);

}  // namespace svtank
