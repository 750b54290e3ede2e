#include "svtank/grid.hpp"

#include <cmath>
#include <string>

#include "svtank/error.hpp"

namespace svtank {

using detail::require;

void PhysicalParams::validate() const {
  require(std::isfinite(g) && g > 0.0, "physical.g must be > 0");
  require(std::isfinite(mu) && mu > 0.0, "physical.mu must be > 0");
  require(std::isfinite(L) && L > 0.0, "physical.L must be > 0");
  require(std::isfinite(m) && m > 0.0, "physical.m must be > 0");
  require(std::isfinite(H_max) && H_max > 0.0, "physical.H_max must be > 0");
  require(h_star() < H_max, "equilibrium level h* = m/L must be below H_max (h* = " +
                                std::to_string(h_star()) + ", H_max = " + std::to_string(H_max) +
                                ")");
}

Grid::Grid(std::size_t n, double L) : n_(n), L_(L), dx_(0.0) {
  require(n >= 8, "grid needs at least 8 nodes");
  require(std::isfinite(L) && L > 0.0, "grid length must be > 0");
  dx_ = L / static_cast<double>(n - 1);
}

double Grid::x(std::size_t i) const {
  // The last node is pinned to L so that dx * (n - 1) reproduces the length.
  return i + 1 == n_ ? L_ : static_cast<double>(i) * dx_;
}

std::vector<double> Grid::nodes() const {
  std::vector<double> out(n_);
  for (std::size_t i = 0; i < n_; ++i) out[i] = x(i);
  return out;
}

double trapezoid_integral(std::span<const double> f, const Grid& grid) {
  require(f.size() == grid.n(), "trapezoid_integral: sample count does not match grid");
  const std::size_t n = f.size();
  double interior = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) interior += f[i];
  return grid.dx() * (interior + 0.5 * (f[0] + f[n - 1]));
}

void central_derivative(std::span<const double> f, const Grid& grid, std::span<double> out) {
  require(f.size() == grid.n() && out.size() == grid.n(),
          "central_derivative: sample count does not match grid");
  const std::size_t n = f.size();
  const double inv2dx = 0.5 / grid.dx();
  out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) * inv2dx;
  for (std::size_t i = 1; i + 1 < n; ++i) out[i] = (f[i + 1] - f[i - 1]) * inv2dx;
  out[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) * inv2dx;
}

std::vector<double> central_derivative(std::span<const double> f, const Grid& grid) {
  std::vector<double> out(f.size());
  central_derivative(f, grid, out);
  return out;
}

double l2_norm_sq(std::span<const double> f, const Grid& grid) {
  require(f.size() == grid.n(), "l2_norm_sq: sample count does not match grid");
  const std::size_t n = f.size();
  double interior = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) interior += f[i] * f[i];
  return grid.dx() * (interior + 0.5 * (f[0] * f[0] + f[n - 1] * f[n - 1]));
}

}  // namespace svtank
