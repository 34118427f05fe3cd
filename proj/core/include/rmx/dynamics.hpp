// dynamics.hpp: infinite-reservoir relaxation dynamics from the resolvent pair.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "rmx/dos.hpp"
#include "rmx/resolvent.hpp"
#include "rmx/state.hpp"

namespace rmx {

/// Tuning knobs for evolve_analytic. The defaults follow the width-based
/// grid rules and are adequate for every shipped experiment.
struct EvolveOptions {
  double eta = 0.0;           ///< base contour height; 0 selects the width rule
  double tolerance = 1e-10;   ///< fixed-point tolerance for resolvent solves
  double tail_target = 1e-4;  ///< absolute truncation budget of the transforms
  int max_window_blocks = 1400;  ///< cap on centre-window growth per side
  int max_tail_blocks = 400;     ///< cap on frequency-tail growth per line
  bool with_coherence = true;    ///< evaluate the coherence sector if seeded
};

/// Run diagnostics of one analytic evolution.
struct EvolveDiagnostics {
  double eta = 0.0;    ///< base contour height actually used
  double width = 0.0;  ///< spectral width scale w
  double window_lo = 0.0;  ///< centre-frequency window, lower edge
  double window_hi = 0.0;  ///< centre-frequency window, upper edge
  double u_max = 0.0;      ///< frequency-difference cutoff (population sector)
  double tail_estimate = 0.0;  ///< bound on the neglected transform tail
  std::size_t resonance_cells = 0;  ///< near-vanishing denominator count
  double hermiticity_residual = 0.0;  ///< coherence consistency check
  double column_sum_residual = 0.0;   ///< max |p_+d + p_-d - 1| over t
  double coherence_amplification = 1.0;  ///< exp(2 eta t_max) error factor
};

/// Reduced evolution: state and transition probabilities at each requested
/// time, the stationary limit, and the stationary/regular split of the
/// populations.
struct EvolutionResult {
  std::vector<double> times;
  std::vector<ReducedState> rho;
  std::vector<ProbMatrix> prob;
  ReducedState stationary = ReducedState::diagonal(0.5, 0.5);
  ProbMatrix stationary_prob;
  /// rho_aa(t) = stationary_component[a] + regular_component[a][it], raw
  /// (pre-renormalization) values by spin index.
  std::array<double, 2> stationary_component{};
  std::array<std::vector<double>, 2> regular_component{};
  EvolveDiagnostics diag;
};

/// Evolves rho0 under the infinite-reservoir dynamics at target energy E.
/// Populations come from the pole-plus-regular split of the two-resolvent
/// transform with small-height extrapolation; coherences from the damped
/// contour transform at the base height. Throws std::invalid_argument when
/// the level density vanishes at E, v <= 0, rho0 is invalid, or a time is
/// negative; propagates SolverError from the resolvent solves.
EvolutionResult evolve_analytic(const DensityOfStates& dos, double s, double v,
                                double E, const ReducedState& rho0,
                                const std::vector<double>& times,
                                const EvolveOptions& opt = {});

/// Stationary populations and transition probabilities.
struct StationaryResult {
  ReducedState rho = ReducedState::diagonal(0.5, 0.5);
  ProbMatrix prob;
};

/// Stationary reduced state at target energy E: the overlap-weighted average
/// of the conditional level densities. Columns of prob sum to one exactly
/// (each conditional density is normalized by its own quadrature mass).
/// eta = 0 selects the width rule for the extrapolation ladder.
StationaryResult stationary_reduced(const DensityOfStates& dos, double s,
                                    double v, double E,
                                    const ReducedState& rho0, double eta = 0.0,
                                    double tol = 1e-10);

/// Scalar memory diagnostic: integral of (nu_+ - nu_-)^2 / (nu_+ + nu_-)
/// over the spectrum. Zero iff the stationary state forgets which level the
/// system started in; vanishes identically at s = 0.
double rho0_dependence_diagnostic(const DensityOfStates& dos, double s,
                                  double v, double eta = 0.0,
                                  double tol = 1e-10);

/// Closed-form evolution in the flat-band regime with level-width A > 0 and
/// splitting s: populations relax telegraph-like at rate 4A toward (1/2, 1/2);
/// the coherence pair follows the 2x2 generator with eigenvalues
/// -2A +- 2 sqrt(A^2 - s^2). Throws std::invalid_argument for A <= 0.
EvolutionResult flat_regime_closed_form(double A, double s,
                                        const ReducedState& rho0,
                                        const std::vector<double>& times);

/// Spin-pair index for two-argument resolvent objects: a is the spin at the
/// first argument, d at the second (0 = up, 1 = down).
inline constexpr int pair_index(int a, int d) { return a * 2 + d; }

/// Joint two-argument resolvent data: the finite-difference kernels
/// r_{ad}(z1, z2) = (r_a(z1) - r_d(z2)) / D_{ad} with
/// D_{ad} = z1 - z2 + s (spin_d - spin_a) + v^2 (r_{-a}(z1) - r_{-d}(z2)),
/// and, for banded interactions, the discretized transfer operator on the
/// reservoir levels.
struct TwoPointKernel {
  Complex z1{}, z2{};
  double s = 0.0;
  double v = 0.0;
  std::array<Complex, 2> r_z1{};  ///< one-argument r_alpha(z1) by spin index
  std::array<Complex, 2> r_z2{};
  std::array<Complex, 4> r2{};     ///< r_{ad}(z1, z2) by pair_index
  std::array<Complex, 4> denom{};  ///< D_{ad} by pair_index
  double min_denom = 0.0;          ///< smallest |D_{ad}|
  bool flagged = false;  ///< a denominator nearly vanished (coincident args)

  /// Ladder-resummed pair correlator Phi_{a b g d}(E; z1, z2): nonzero only
  /// for (b, g) = (a, d) and (b, g) = (-a, -d). Meaningful for the scalar
  /// variant (nodes empty).
  Complex assembled(double E, int a, int b, int g, int d) const;

  // Banded-interaction part (empty for the scalar variant). Per spin pair:
  // the transfer-operator image s_line = S_{ad} 1 on the level nodes, the
  // resolved ladder (1 - S_{-a-d} S_{ad})^{-1} s_line, and the smallest
  // singular value of the resolved system.
  std::vector<double> nodes;
  std::array<std::vector<Complex>, 4> s_line{};
  std::array<std::vector<Complex>, 4> resolved{};
  std::array<double, 4> min_singular{};
  bool near_singular = false;  ///< smallest singular value below 1e-10
};

/// Scalar (full-ensemble) two-argument kernel at (z1, z2); both arguments
/// may lie in either half plane but not on the real axis.
TwoPointKernel two_point_scalar(const DensityOfStates& dos, double s, double v,
                                Complex z1, Complex z2, double tol = 1e-10);

/// Banded-interaction two-argument kernel on the level nodes of `field`
/// (which must be mid-quantile nodes of the level density, equal-mass
/// weights). iz1/iz2 index field.zs. The field must have been solved with
/// the same form factor.
TwoPointKernel band_two_point(const BandKernel& kernel,
                              const SelfEnergyField& field, std::size_t iz1,
                              std::size_t iz2);

}  // namespace rmx
