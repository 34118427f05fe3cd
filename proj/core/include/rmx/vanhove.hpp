// vanhove.hpp: weak-coupling (rescaled-time) closed forms and the associated
// two-state master systems.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <utility>
#include <vector>

#include "rmx/dos.hpp"
#include "rmx/state.hpp"

namespace rmx {

/// Three-mode decomposition of one diagonal occupation in rescaled time
/// tau = t v^2:
///   p(tau) = stationary + amp_own e^{-gamma_own tau} + amp_cross e^{-gamma_cross tau}.
struct VanHoveModes {
  double stationary = 0.0;
  double amp_own = 0.0;
  double amp_cross = 0.0;
  double gamma_own = 0.0;
  double gamma_cross = 0.0;

  double at(double tau) const;
};

/// Population trajectory in rescaled time; off-diagonals are identically
/// zero in this limit, so only the two diagonals evolve.
struct VanHoveTrajectory {
  std::vector<double> tau;
  std::vector<ReducedState> rho;
  VanHoveModes modes_p;  // decomposition of rho_pp
  VanHoveModes modes_m;  // decomposition of rho_mm
};

/// Mode decomposition of level idx for an initial state prepared at
/// reservoir energy E. With u = nu0(E), up = nu0(E + 2 s a),
/// um = nu0(E - 2 s a) for a = spin_sign(idx):
///   stationary = u/(u+up) rho_aa(0) + um/(um+u) rho_bb(0)
///   amp_own    = up/(u+up) rho_aa(0),  gamma_own   = 2 pi (u + up)
///   amp_cross  = -um/(um+u) rho_bb(0), gamma_cross = 2 pi (u + um)
/// where b = -a. Degenerate channels (vanishing density on both ends of an
/// exchange pair) are frozen instead of dividing by zero.
VanHoveModes vanhove_modes(const DensityOfStates& dos, double E, double s,
                           int idx, const ReducedState& rho0);

/// Weak-coupling populations at reservoir energy E on a tau grid. The
/// trajectory preserves the trace at every tau and returns rho0's
/// diagonals exactly at tau = 0.
VanHoveTrajectory vanhove_reduced(const DensityOfStates& dos, double E,
                                  double s, const ReducedState& rho0,
                                  const std::vector<double>& taus);

/// Two-state gain/loss system dp_a/dtau = -g_a p_a + g_b p_b, b = -a.
struct MasterSystem {
  double g_p = 0.0;
  double g_m = 0.0;

  double relaxation_rate() const { return g_p + g_m; }

  /// Stationary occupations (p_p, p_m) carrying the given total weight.
  std::pair<double, double> stationary(double total = 1.0) const;

  /// Closed-form solution from (p_p0, p_m0) at rescaled time tau.
  std::pair<double, double> solve(double p_p0, double p_m0, double tau) const;
};

/// Closed-form trajectories of a master system on a tau grid. Occupations
/// sum to their initial total along the whole trajectory.
VanHoveTrajectory master_solve(const MasterSystem& system,
                               const ReducedState& rho0,
                               const std::vector<double>& taus);

/// Banded-kernel weak-coupling system at inverse temperature beta, with
/// w2s the form-factor value at the level splitting 2s: gains
/// g_a = 2 pi w2s e^{beta s a}, relaxation rate 4 pi w2s cosh(beta s),
/// stationary occupations e^{-beta s a}/(2 cosh beta s). Rejects w2s <= 0.
MasterSystem band_master(double w2s, double s, double beta);

/// Banded-kernel weak-coupling run: the master system plus its exact
/// trajectory from rho0.
struct BandVanHove {
  MasterSystem system;
  VanHoveTrajectory trajectory;
};

BandVanHove vanhove_band(double w2s, double s, double beta,
                         const ReducedState& rho0,
                         const std::vector<double>& taus);

/// Golden-rule decay-rate estimates for level idx at reservoir energy E,
/// scaled by the squared coupling v_sq (pass 1 for rescaled-time units).
/// Both final-state-energy conventions are reported side by side.
struct RateEstimates {
  double rate_half_shift = 0.0;  // 4 pi v_sq (nu0(E) + nu0(E + s a))
  double rate_full_shift = 0.0;  // 2 pi v_sq (nu0(E) + nu0(E + 2 s a))
};

RateEstimates rescaled_rate(const DensityOfStates& dos, double E, double s,
                            double v_sq, int idx);

/// Golden-rule rates for a width-b Lorentzian band kernel on a locally
/// flat density with A the flat-regime rate scale: gamma = 4A holds for
/// b >> s, and the population rate shrinks to gamma_pop = gamma b^2/(s^2+b^2)
/// when the splitting is comparable to the band width.
struct BandRates {
  double gamma = 0.0;
  double gamma_pop = 0.0;
};

BandRates band_regime_rates(double A, double s, double b);

/// Least-squares fit of a two-state linear system to sampled occupations on
/// a uniform tau grid; the derivative is taken with a five-point stencil.
/// `residual` is the maximum absolute equation defect over the interior
/// points, so trajectories generated by any true two-state system fit to
/// stencil accuracy while three-mode trajectories cannot.
struct MasterFit {
  double g_p = 0.0;
  double g_m = 0.0;
  double residual = 0.0;
};

MasterFit fit_master_system(const std::vector<double>& taus,
                            const std::vector<double>& p_p,
                            const std::vector<double>& p_m);

}  // namespace rmx
