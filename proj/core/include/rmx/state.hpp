// state.hpp: two-level reduced states, transition probabilities, transfer maps.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <stdexcept>
#include <string>

#include "rmx/numerics.hpp"

namespace rmx {

/// Spin index convention: slot 0 is the upper level (alpha = +1), slot 1 the
/// lower level (alpha = -1).
inline constexpr double spin_sign(int idx) { return idx == 0 ? 1.0 : -1.0; }

/// General 2x2 complex matrix in (up, down) basis.
struct Mat2c {
  Complex pp{0.0, 0.0};
  Complex pm{0.0, 0.0};
  Complex mp{0.0, 0.0};
  Complex mm{0.0, 0.0};

  Complex& at(int i, int j) {
    return i == 0 ? (j == 0 ? pp : pm) : (j == 0 ? mp : mm);
  }
  Complex at(int i, int j) const {
    return i == 0 ? (j == 0 ? pp : pm) : (j == 0 ? mp : mm);
  }
};

/// Reduced density matrix of the two-level system: Hermitian, unit trace,
/// positive semidefinite. Stores the independent entries (mp = conj(pm)).
struct ReducedState {
  double pp = 1.0;
  double mm = 0.0;
  Complex pm{0.0, 0.0};

  static ReducedState diagonal(double up, double down) {
    ReducedState r;
    r.pp = up;
    r.mm = down;
    r.pm = Complex(0.0, 0.0);
    return r;
  }
  static ReducedState general(double up, double down, Complex coh) {
    ReducedState r;
    r.pp = up;
    r.mm = down;
    r.pm = coh;
    return r;
  }

  double trace() const { return pp + mm; }
  /// Diagonal entry by spin index (0 = up, 1 = down).
  double diag(int idx) const { return idx == 0 ? pp : mm; }
  double& diag(int idx) { return idx == 0 ? pp : mm; }

  Mat2c as_matrix() const { return Mat2c{pp, pm, std::conj(pm), mm}; }

  /// Throws std::invalid_argument naming the violated property when the
  /// state is not a valid density matrix within tol.
  void validate(double tol = 1e-9) const;
};

/// Transition-probability matrix p[a][d]: probability of ending in level a
/// having started in level d; columns sum to 1.
struct ProbMatrix {
  std::array<std::array<double, 2>, 2> p{{{1.0, 0.0}, {0.0, 1.0}}};

  double& at(int a, int d) { return p[a][d]; }
  double at(int a, int d) const { return p[a][d]; }
  double column_sum(int d) const { return p[0][d] + p[1][d]; }
};

/// Linear map from the initial reduced state to the state at time t:
/// rho_out[a][d] = sum_{b,g} T[a][b][g][d] * rho_in[b][g].
struct TransferTensor {
  std::array<Complex, 16> t{};

  static constexpr int flat(int a, int b, int g, int d) {
    return ((a * 2 + b) * 2 + g) * 2 + d;
  }
  Complex& at(int a, int b, int g, int d) { return t[flat(a, b, g, d)]; }
  Complex at(int a, int b, int g, int d) const { return t[flat(a, b, g, d)]; }

  static TransferTensor identity() {
    TransferTensor out;
    for (int a = 0; a < 2; ++a)
      for (int g = 0; g < 2; ++g) out.at(a, a, g, g) = Complex(1.0, 0.0);
    return out;
  }

  Mat2c apply(const Mat2c& rho) const;

  /// Embedded transition probabilities p[a][d] = T[a][d][d][a].
  ProbMatrix probabilities() const;
};

}  // namespace rmx
