// resolvent.hpp: self-consistent one-point equations, spectral densities,
// equilibrium reduced states, band-model self-energy.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rmx/dos.hpp"
#include "rmx/state.hpp"

namespace rmx {

/// Fixed-point failure; carries the residual at the last iterate.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// Converged pair (r_plus, r_minus) at one complex argument.
struct ResolventPair {
  Complex rp{0.0, 0.0};
  Complex rm{0.0, 0.0};
  int iterations = 0;
  double residual = 0.0;

  Complex r(int idx) const { return idx == 0 ? rp : rm; }
};

/// Damped fixed-point solve of the coupled pair
///   r_a = m(z - s*a + v^2 r_{-a}),  a = +,-
/// where m is the level-density Stieltjes transform. Works in either half
/// plane; the sign of Im r_a matches the sign of Im z. Starts from the
/// uncoupled value unless a warm start is given; damping theta halves
/// whenever the residual grows.
ResolventPair solve_pair(const DensityOfStates& dos, double s, double v,
                         Complex z, double tol = 1e-10,
                         const ResolventPair* warm = nullptr,
                         double theta0 = 0.5, int max_iter = 200000);

/// First z-derivatives (r_plus', r_minus') from the converged pair by
/// differentiating the fixed point (linear 2x2 solve).
std::pair<Complex, Complex> pair_derivs(const DensityOfStates& dos, double s,
                                        double v, Complex z,
                                        const ResolventPair& pair);

/// Solved field on a caller-provided complex grid.
struct ResolventField {
  double s = 0.0;
  double v = 0.0;
  std::vector<Complex> grid;
  std::vector<Complex> rp, rm;
};

/// Solves along the grid in order with warm starts; every point satisfies
/// the Herglotz sign condition on exit.
ResolventField solve_one_point(const DensityOfStates& dos, double s, double v,
                               const std::vector<Complex>& grid,
                               double tol = 1e-10);

/// Boundary values on the real axis, extrapolated over the ladder
/// eta in {4h, 2h, h} by Richardson; `singular` marks points where the
/// two- and three-point extrapolations disagree beyond 1e-4.
struct BoundaryResolvent {
  double lambda = 0.0;
  Complex rp{0.0, 0.0};
  Complex rm{0.0, 0.0};
  bool singular = false;

  Complex r(int idx) const { return idx == 0 ? rp : rm; }
  double nu(int idx) const;  // max(Im r, 0)/pi
};

BoundaryResolvent boundary_resolvent(const DensityOfStates& dos, double s,
                                     double v, double lambda, double h,
                                     double tol = 1e-10);

/// Spectral densities nu_alpha(lambda) on a lambda grid with singular flags
/// and the occupation weight omega_plus = nu_p/(nu_p + nu_m).
struct SpectralDensities {
  std::vector<double> lambda;
  std::vector<double> nu_p, nu_m, omega_p;
  std::vector<int> flag_singular;

  /// Finite-window average over [lam-eps, lam+eps] by trapezoid on this
  /// grid (the grid must cover the window).
  double window_average(int idx, double lam, double eps) const;
};

SpectralDensities spectral_density(const DensityOfStates& dos, double s,
                                   double v,
                                   const std::vector<double>& lambdas,
                                   double h, double tol = 1e-10);

/// Conditional density nu_alpha(E, lambda): the Lorentzian-like profile in
/// lambda carried by reservoir energy E.
double conditional_density_at(double E, int idx, double s, double v,
                              const BoundaryResolvent& b);

/// Microcanonical reduced state at energy lambda: diag(omega_+, omega_-).
ReducedState equilibrium_microcanonical(const DensityOfStates& dos, double s,
                                        double v, double lambda, double h);

/// Canonical reduced state at inverse temperature beta: diagonal entries
/// Int exp(-beta lam) nu_alpha dlam normalized over both levels. The
/// quadrature window expands until the weight falls below 1e-16 of its
/// peak; the window and a per-node gate follow an envelope of the bare
/// density, so the Boltzmann factor cannot amplify resolvent noise in the
/// far tail. Throws std::domain_error if no mass remains representable.
ReducedState equilibrium_canonical(const DensityOfStates& dos, double s,
                                   double v, double beta, double h);

/// Tail comparison at energy J*e for the Gaussian convolution family.
struct TailRatioResult {
  double ratio = 0.0;      // nu_alpha(Je)/nu0(Je), measured
  double limit = 0.0;      // exp(-beta * s * alpha), predicted
  double nu_alpha = 0.0;
  double nu0 = 0.0;
  double bound = 0.0;      // sqrt(pi/(2 J a^2)) sup bound on |r_alpha|
  double max_abs_r = 0.0;  // attained |r_alpha| at the evaluation point
};

TailRatioResult tail_ratio(const DensityOfStates& family, double s, double v,
                           int J, double e, int idx);

/// Banded interaction kernel with an optional locality scale. A finite
/// width means f(E, E') is negligible for |E - E'| >> width and enables the
/// windowed solve; width = infinity treats the kernel as global.
struct BandKernel {
  std::function<double(double, double)> f;
  double width = std::numeric_limits<double>::infinity();
};

/// Self-energy pair on requested energies for each z.
struct SelfEnergyField {
  double s = 0.0;
  double v = 0.0;
  std::vector<Complex> zs;
  std::vector<double> Es;
  std::vector<std::vector<Complex>> delta_p;  // [z][E]
  std::vector<std::vector<Complex>> delta_m;
  double residual = 0.0;
  int iterations = 0;
};

/// Damped fixed point for the banded self-energy
///   Delta_a(E, z) = v^2 Int f(E,E') nu0(E') dE' /
///                   (E' + s*a - z - Delta_{-a}(E', z)).
/// Nystrom discretization on the caller's level grid: Es must be ascending
/// mid-quantile nodes of the density, so the integral is the equal-weight
/// mean over the nodes. A finite kernel width restricts each row to a
/// local window of neighbors.
SelfEnergyField solve_self_energy(const DensityOfStates& dos, double s,
                                  double v, const BandKernel& kernel,
                                  const std::vector<double>& Es,
                                  const std::vector<Complex>& zs,
                                  double tol = 1e-12);

}  // namespace rmx
