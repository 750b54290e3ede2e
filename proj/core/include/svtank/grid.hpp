#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace svtank {

/// Physical constants of the tank-liquid system. The equilibrium level is
/// always derived from m / L and never stored.
struct PhysicalParams {
  double g = 9.81;     ///< gravitational acceleration [m/s^2]
  double mu = 0.1;     ///< kinematic viscosity [m^2/s]
  double L = 1.0;      ///< tank length [m]
  double m = 0.5;      ///< liquid mass per unit width, integral of h [m^2]
  double H_max = 1.0;  ///< wall height [m]

  double h_star() const { return m / L; }

  /// Throws InvalidInput naming the first violated invariant.
  void validate() const;
};

/// Uniform collocated grid on [0, L] including both wall nodes.
class Grid {
 public:
  Grid(std::size_t n, double L);

  std::size_t n() const { return n_; }
  double L() const { return L_; }
  double dx() const { return dx_; }
  double x(std::size_t i) const;
  std::vector<double> nodes() const;

 private:
  std::size_t n_;
  double L_;
  double dx_;
};

/// Composite trapezoid rule over the grid nodes.
double trapezoid_integral(std::span<const double> f, const Grid& grid);

/// Second-order central differences in the interior and one-sided
/// second-order stencils at the two wall nodes.
std::vector<double> central_derivative(std::span<const double> f, const Grid& grid);
void central_derivative(std::span<const double> f, const Grid& grid, std::span<double> out);

/// Squared discrete L2 norm, trapezoid weighted.
double l2_norm_sq(std::span<const double> f, const Grid& grid);

}  // namespace svtank
