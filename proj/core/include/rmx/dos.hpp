// dos.hpp: reservoir level-density models with quantiles and transforms.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rmx/numerics.hpp"

namespace rmx {

/// Local thermodynamic data of a level-density family at energy-per-subsystem
/// e: the large-deviation rate value sJ and the local inverse temperature
/// beta = d(sJ)/de.
struct ThermoPoint {
  double e = 0.0;
  double beta = 0.0;
  double sJ = 0.0;
};

/// Unit-mass profile shapes for the scaled-flat family.
enum class FlatProfile { Gaussian, Semicircle };

/// Reservoir density of states: one of four families, immutable after
/// construction. All evaluation paths are pure and thread safe.
///
/// Families:
///  - gaussian_convolution(J, a, e0): normal density with mean J*e0 and
///    variance J*a^2 (J-fold convolution of a width-a Gaussian at e0).
///  - lattice(delta): arcsine band on (0, 4/delta^2), the level density of a
///    nearest-neighbor periodic chain with spacing delta.
///  - scaled_flat(profile, a): unit-mass profile stretched by a, i.e.
///    phi(E/a)/a; locally flat near 0 for a large.
///  - tabulated(grid, values): piecewise-linear density on a strictly
///    increasing grid, zero outside, renormalized to unit mass at load.
class DensityOfStates {
 public:
  enum class Kind { GaussianConvolution, Lattice, ScaledFlat, Tabulated };

  static DensityOfStates gaussian_convolution(int J, double a, double e0);
  static DensityOfStates lattice(double delta);
  static DensityOfStates scaled_flat(FlatProfile profile, double a);
  static DensityOfStates tabulated(std::vector<double> grid,
                                   std::vector<double> values);

  Kind kind() const { return kind_; }

  /// Density value; zero outside the support.
  double eval(double E) const;

  /// Cumulative distribution F(E) = integral of the density up to E.
  double cdf(double E) const;

  /// Deterministic mid-quantile levels E_j = F^{-1}((j - 1/2)/n), sorted.
  std::vector<double> quantiles(std::size_t n) const;

  /// Stieltjes transform m(z) = Int dens(E)/(E - z) dE, valid in both half
  /// planes; exactly real z is treated as the upper boundary value.
  Complex stieltjes(Complex z) const;

  /// Derivative m'(z) = Int dens(E)/(E - z)^2 dE.
  Complex stieltjes_deriv(Complex z) const;

  /// Interval [lo, hi] outside which the density carries negligible mass
  /// (exactly zero for compactly supported families).
  std::pair<double, double> mass_window() const;

  /// Support points where the density is not smooth (band edges, table
  /// nodes); quadrature and continuation refine near these.
  std::vector<double> sharp_points() const;

  /// Rate-function point: sJ(e) = log(dens(J e))/J and beta = d(sJ)/de.
  /// Closed form for the Gaussian family (the stored count is replaced by
  /// the argument J so the whole family is reachable); finite differences of
  /// log(dens) for tabulated data. Other families are not rate-function
  /// models and throw.
  ThermoPoint rate_function(int J, double e) const;

  /// Density ratio dens(J e + eps)/dens(J e); tends to exp(beta * eps) for
  /// the Gaussian family as J grows.
  double local_gibbs_ratio(int J, double e, double eps) const;

  // Family parameters (meaningful per kind; see factories).
  int conv_count() const { return J_; }
  double scale() const { return a_; }
  double offset() const { return e0_; }
  double spacing() const { return delta_; }
  FlatProfile profile() const { return profile_; }
  const std::vector<double>& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }

 private:
  DensityOfStates() = default;

  Kind kind_ = Kind::GaussianConvolution;
  int J_ = 1;
  double a_ = 1.0;
  double e0_ = 0.0;
  double delta_ = 1.0;
  FlatProfile profile_ = FlatProfile::Gaussian;
  std::vector<double> grid_;
  std::vector<double> values_;
  std::vector<double> cum_;  // tabulated: cumulative mass at grid nodes
};

}  // namespace rmx
