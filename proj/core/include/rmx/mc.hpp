// mc.hpp: finite-n sampling, exact reduced dynamics, ensemble averaging.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rmx/dos.hpp"
#include "rmx/state.hpp"

namespace rmx {

/// Random coupling-matrix law: full orthogonal-ensemble statistics or the
/// banded law with entry variances f(E_j, E_k).
struct InteractionSpec {
  enum class Kind { Goe, Banded };
  Kind kind = Kind::Goe;
  double v = 1.0;
  std::function<double(double, double)> form_factor;  // Banded only

  static InteractionSpec goe(double v) {
    InteractionSpec s;
    s.kind = Kind::Goe;
    s.v = v;
    return s;
  }
  static InteractionSpec banded(double v,
                                std::function<double(double, double)> f) {
    InteractionSpec s;
    s.kind = Kind::Banded;
    s.v = v;
    s.form_factor = std::move(f);
    return s;
  }
};

/// The 2n x 2n composite matrix: upper block carries +s, lower block -s, the
/// coupling enters the off-diagonal blocks as (v/sqrt(n)) w.
struct CompositeHamiltonian {
  std::size_t n = 0;
  double s = 0.0;
  double v = 0.0;
  std::vector<double> levels;
  Eigen::MatrixXd matrix;
};

/// Composite initial state rho0 (x) reservoir part: a single reservoir level
/// or a canonical mixture over levels.
struct InitialState {
  enum class Kind { PureLevel, Canonical };
  Kind kind = Kind::PureLevel;
  ReducedState rho0;
  std::size_t level = 0;  // PureLevel
  double beta = 0.0;      // Canonical

  static InitialState pure_level(const ReducedState& r, std::size_t k) {
    InitialState s;
    s.kind = Kind::PureLevel;
    s.rho0 = r;
    s.level = k;
    return s;
  }
  static InitialState canonical(const ReducedState& r, double beta) {
    InitialState s;
    s.kind = Kind::Canonical;
    s.rho0 = r;
    s.beta = beta;
    return s;
  }
};

/// One realization's reduced trajectory with transition probabilities.
struct RealizationTrajectory {
  std::vector<double> times;
  std::vector<ReducedState> rho;
  std::vector<ProbMatrix> p;
};

/// Transfer-map trajectory for one realization and one starting level.
struct TransferTrajectory {
  std::vector<double> times;
  std::vector<TransferTensor> tensors;
  std::vector<ProbMatrix> p;
};

/// Observable column order shared by CSV output and ensemble aggregation.
inline constexpr std::array<const char*, 8> kTrajectoryColumns = {
    "rho_pp", "rho_mm", "rho_pm_re", "rho_pm_im",
    "p_pp",   "p_pm",   "p_mp",      "p_mm"};

std::array<double, 8> trajectory_row(const ReducedState& r,
                                     const ProbMatrix& p);

/// Monte Carlo aggregate: per-time mean and standard error of the eight
/// observable columns over independent coupling draws.
struct EnsembleEstimate {
  std::vector<double> times;
  std::vector<std::array<double, 8>> mean;
  std::vector<std::array<double, 8>> stderr_;
  std::size_t count = 0;
};

/// Draws the symmetric n x n coupling matrix; deterministic in seed.
Eigen::MatrixXd sample_interaction(const InteractionSpec& spec,
                                   const std::vector<double>& levels,
                                   std::uint64_t seed);

/// Assembles the composite matrix from levels, splitting s and coupling w.
CompositeHamiltonian assemble_hamiltonian(double s,
                                          const InteractionSpec& spec,
                                          const std::vector<double>& levels,
                                          const Eigen::MatrixXd& w);

/// Exact reduced dynamics of one realization via a single eigendecomposition
/// reused for every time point; trace is conserved to rounding.
RealizationTrajectory evolve_reduced(const CompositeHamiltonian& h,
                                     const InitialState& init,
                                     const std::vector<double>& times);

/// Transfer tensor and transition probabilities for starting level k.
TransferTrajectory transfer_and_probabilities(const CompositeHamiltonian& h,
                                              std::size_t k,
                                              const std::vector<double>& times);

/// Index of the level closest to E (ties resolve to the lower index).
std::size_t nearest_level_index(const std::vector<double>& levels, double E);

/// Full ensemble description for mc_average.
struct EnsembleModel {
  DensityOfStates dos = DensityOfStates::gaussian_convolution(1, 1.0, 0.0);
  InteractionSpec spec;
  double s = 0.0;
  std::size_t n = 8;
  InitialState::Kind reservoir = InitialState::Kind::PureLevel;
  double energy = 0.0;  // PureLevel: target energy, mapped to nearest level
  double beta = 0.0;    // Canonical
  ReducedState rho0;
};

/// Averages evolve_reduced over R independent draws with per-realization
/// seeds derived from master_seed; the reduction is performed in realization
/// order, so results are bitwise independent of worker count.
EnsembleEstimate mc_average(const EnsembleModel& model, std::size_t R,
                            std::uint64_t master_seed,
                            const std::vector<double>& times, int workers = 1);

}  // namespace rmx
