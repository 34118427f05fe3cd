// mc.cpp: coupling-matrix sampling, exact finite-n dynamics, averaging.
// SPDX-License-Identifier: Apache-2.0
#include "rmx/mc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "rmx/numerics.hpp"
#include "rmx/rng.hpp"

namespace rmx {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct EigDecomp {
  MatrixXd U;
  VectorXd lam;
};

EigDecomp decompose(const CompositeHamiltonian& h) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(h.matrix);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("eigendecomposition failed");
  return {es.eigenvectors(), es.eigenvalues()};
}

// Complex vector as a real/imaginary pair of Eigen vectors.
struct CVec {
  VectorXd re, im;
};

// psi(t) = U exp(-i t Lam) U^T u_row; row indexes the starting basis vector.
CVec propagate_basis_vector(const EigDecomp& e, Eigen::Index row, double t) {
  const VectorXd c = e.U.row(row).transpose();
  const VectorXd ph = t * e.lam;
  const VectorXd cs = ph.array().cos().matrix().cwiseProduct(c);
  const VectorXd sn = ph.array().sin().matrix().cwiseProduct(c);
  return {e.U * cs, -(e.U * sn)};
}

// Sum over the reservoir index of psi_b[a-block] * conj(psi_g[d-block]).
Complex block_dot(const CVec& psi_b, int a, const CVec& psi_g, int d,
                  Eigen::Index n) {
  const auto ar = psi_b.re.segment(a * n, n);
  const auto ai = psi_b.im.segment(a * n, n);
  const auto br = psi_g.re.segment(d * n, n);
  const auto bi = psi_g.im.segment(d * n, n);
  return Complex(ar.dot(br) + ai.dot(bi), ai.dot(br) - ar.dot(bi));
}

TransferTensor transfer_at(const CVec& psi_p, const CVec& psi_m,
                           Eigen::Index n) {
  const CVec* psi[2] = {&psi_p, &psi_m};
  TransferTensor t;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int g = 0; g < 2; ++g)
        for (int d = 0; d < 2; ++d)
          t.at(a, b, g, d) = block_dot(*psi[b], a, *psi[g], d, n);
  return t;
}

std::vector<double> canonical_weights(const std::vector<double>& levels,
                                      double beta) {
  double shift = levels.front();
  for (double E : levels) {
    const double arg = -beta * E;
    if (arg > -beta * shift) shift = E;
  }
  std::vector<double> w(levels.size());
  double total = 0.0;
  for (std::size_t k = 0; k < levels.size(); ++k) {
    w[k] = std::exp(-beta * (levels[k] - shift));
    total += w[k];
  }
  for (double& x : w) x /= total;
  return w;
}

RealizationTrajectory evolve_pure_level(const CompositeHamiltonian& h,
                                        const InitialState& init,
                                        const std::vector<double>& times) {
  const Eigen::Index n = static_cast<Eigen::Index>(h.n);
  if (init.level >= h.n)
    throw std::invalid_argument("initial level index out of range");
  const EigDecomp e = decompose(h);
  const Eigen::Index k = static_cast<Eigen::Index>(init.level);

  RealizationTrajectory out;
  out.times = times;
  out.rho.reserve(times.size());
  out.p.reserve(times.size());
  const Mat2c rho0 = init.rho0.as_matrix();
  for (double t : times) {
    const CVec psi_p = propagate_basis_vector(e, k, t);
    const CVec psi_m = propagate_basis_vector(e, n + k, t);
    const TransferTensor tt = transfer_at(psi_p, psi_m, n);
    const Mat2c rho = tt.apply(rho0);
    ReducedState r;
    r.pp = rho.pp.real();
    r.mm = rho.mm.real();
    r.pm = rho.pm;
    out.rho.push_back(r);
    out.p.push_back(tt.probabilities());
  }
  return out;
}

RealizationTrajectory evolve_canonical(const CompositeHamiltonian& h,
                                       const InitialState& init,
                                       const std::vector<double>& times) {
  const Eigen::Index n = static_cast<Eigen::Index>(h.n);
  const Eigen::Index N = 2 * n;
  const EigDecomp e = decompose(h);
  const std::vector<double> cw = canonical_weights(h.levels, init.beta);
  VectorXd w(n);
  for (Eigen::Index j = 0; j < n; ++j) w[j] = cw[static_cast<std::size_t>(j)];

  const auto Qp = e.U.topRows(n);
  const auto Qm = e.U.bottomRows(n);
  const MatrixXd DQp = w.asDiagonal() * Qp;
  const MatrixXd DQm = w.asDiagonal() * Qm;
  const MatrixXd Bpp = Qp.transpose() * DQp;
  const MatrixXd Bmm = Qm.transpose() * DQm;
  const MatrixXd Bpm = Qp.transpose() * DQm;
  const MatrixXd Gpp = Qp.transpose() * Qp;
  const MatrixXd Gmm = Qm.transpose() * Qm;
  const MatrixXd Gpm = Qp.transpose() * Qm;

  const Complex pm = init.rho0.pm;
  Eigen::MatrixXcd M = (init.rho0.pp * Bpp + init.rho0.mm * Bmm).cast<Complex>();
  M += pm * Bpm.cast<Complex>();
  M += std::conj(pm) * Bpm.transpose().cast<Complex>();

  const Eigen::MatrixXcd Kpp = M.cwiseProduct(Gpp.cast<Complex>());
  const Eigen::MatrixXcd Kmm = M.cwiseProduct(Gmm.cast<Complex>());
  const Eigen::MatrixXcd Kpm = M.cwiseProduct(Gpm.cast<Complex>());
  const MatrixXd P[2][2] = {{Bpp.cwiseProduct(Gpp), Bmm.cwiseProduct(Gpp)},
                            {Bpp.cwiseProduct(Gmm), Bmm.cwiseProduct(Gmm)}};

  RealizationTrajectory out;
  out.times = times;
  out.rho.reserve(times.size());
  out.p.reserve(times.size());
  for (double t : times) {
    const VectorXd ph = t * e.lam;
    const VectorXd cs = ph.array().cos().matrix();
    const VectorXd sn = ph.array().sin().matrix();
    Eigen::VectorXcd phib(N);  // conj(phi) with phi_p = exp(-i t lam_p)
    phib.real() = cs;
    phib.imag() = sn;
    const Complex rpp = phib.dot(Kpp * phib);
    const Complex rmm = phib.dot(Kmm * phib);
    const Complex rpm = phib.dot(Kpm * phib);
    ReducedState r;
    r.pp = rpp.real();
    r.mm = rmm.real();
    r.pm = rpm;
    out.rho.push_back(r);
    ProbMatrix p;
    for (int a = 0; a < 2; ++a)
      for (int d = 0; d < 2; ++d)
        p.at(a, d) = cs.dot(P[a][d] * cs) + sn.dot(P[a][d] * sn);
    out.p.push_back(p);
  }
  return out;
}

}  // namespace

std::array<double, 8> trajectory_row(const ReducedState& r,
                                     const ProbMatrix& p) {
  return {r.pp,       r.mm,       r.pm.real(), r.pm.imag(),
          p.at(0, 0), p.at(0, 1), p.at(1, 0),  p.at(1, 1)};
}

Eigen::MatrixXd sample_interaction(const InteractionSpec& spec,
                                   const std::vector<double>& levels,
                                   std::uint64_t seed) {
  const Eigen::Index n = static_cast<Eigen::Index>(levels.size());
  if (n < 1) throw std::invalid_argument("need at least one level");
  GaussianStream g(seed);
  MatrixXd w(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = j; k < n; ++k) {
      double var = 0.0;
      if (spec.kind == InteractionSpec::Kind::Goe) {
        var = (j == k) ? 2.0 : 1.0;
      } else {
        const double f =
            spec.form_factor(levels[static_cast<std::size_t>(j)],
                             levels[static_cast<std::size_t>(k)]);
        if (f < 0.0)
          throw std::invalid_argument("form factor must be nonnegative");
        var = (j == k) ? 2.0 * f : f;
      }
      const double x = std::sqrt(var) * g.normal();
      w(j, k) = x;
      w(k, j) = x;
    }
  }
  return w;
}

CompositeHamiltonian assemble_hamiltonian(double s,
                                          const InteractionSpec& spec,
                                          const std::vector<double>& levels,
                                          const Eigen::MatrixXd& w) {
  const Eigen::Index n = static_cast<Eigen::Index>(levels.size());
  if (w.rows() != n || w.cols() != n)
    throw std::invalid_argument("coupling matrix size differs from levels");
  CompositeHamiltonian h;
  h.n = levels.size();
  h.s = s;
  h.v = spec.v;
  h.levels = levels;
  h.matrix = MatrixXd::Zero(2 * n, 2 * n);
  const double c = spec.v / std::sqrt(static_cast<double>(n));
  for (Eigen::Index j = 0; j < n; ++j) {
    h.matrix(j, j) = levels[static_cast<std::size_t>(j)] + s;
    h.matrix(n + j, n + j) = levels[static_cast<std::size_t>(j)] - s;
  }
  h.matrix.topRightCorner(n, n) = c * w;
  h.matrix.bottomLeftCorner(n, n) = c * w;
  return h;
}

RealizationTrajectory evolve_reduced(const CompositeHamiltonian& h,
                                     const InitialState& init,
                                     const std::vector<double>& times) {
  init.rho0.validate(1e-9);
  if (init.kind == InitialState::Kind::PureLevel)
    return evolve_pure_level(h, init, times);
  return evolve_canonical(h, init, times);
}

TransferTrajectory transfer_and_probabilities(const CompositeHamiltonian& h,
                                              std::size_t k,
                                              const std::vector<double>& times) {
  const Eigen::Index n = static_cast<Eigen::Index>(h.n);
  if (k >= h.n) throw std::invalid_argument("starting level out of range");
  const EigDecomp e = decompose(h);
  TransferTrajectory out;
  out.times = times;
  out.tensors.reserve(times.size());
  out.p.reserve(times.size());
  for (double t : times) {
    const CVec psi_p = propagate_basis_vector(e, static_cast<Eigen::Index>(k), t);
    const CVec psi_m =
        propagate_basis_vector(e, n + static_cast<Eigen::Index>(k), t);
    const TransferTensor tt = transfer_at(psi_p, psi_m, n);
    out.tensors.push_back(tt);
    out.p.push_back(tt.probabilities());
  }
  return out;
}

std::size_t nearest_level_index(const std::vector<double>& levels, double E) {
  if (levels.empty()) throw std::invalid_argument("empty level list");
  std::size_t best = 0;
  double dist = std::abs(levels[0] - E);
  for (std::size_t j = 1; j < levels.size(); ++j) {
    const double d = std::abs(levels[j] - E);
    if (d < dist) {
      dist = d;
      best = j;
    }
  }
  return best;
}

EnsembleEstimate mc_average(const EnsembleModel& model, std::size_t R,
                            std::uint64_t master_seed,
                            const std::vector<double>& times, int workers) {
  if (R < 1) throw std::invalid_argument("need at least one realization");
  const std::vector<double> levels = model.dos.quantiles(model.n);
  InitialState init;
  if (model.reservoir == InitialState::Kind::PureLevel) {
    init = InitialState::pure_level(model.rho0,
                                    nearest_level_index(levels, model.energy));
  } else {
    init = InitialState::canonical(model.rho0, model.beta);
  }

  const std::size_t T = times.size();
  std::vector<std::vector<std::array<double, 8>>> results(
      R, std::vector<std::array<double, 8>>(T));

  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  const auto worker = [&]() {
    for (;;) {
      const std::size_t r = next.fetch_add(1);
      if (r >= R) return;
      try {
        const std::uint64_t seed = derive_seed(master_seed, r);
        const Eigen::MatrixXd w = sample_interaction(model.spec, levels, seed);
        const CompositeHamiltonian h =
            assemble_hamiltonian(model.s, model.spec, levels, w);
        const RealizationTrajectory traj = evolve_reduced(h, init, times);
        for (std::size_t i = 0; i < T; ++i) {
          const auto row = trajectory_row(traj.rho[i], traj.p[i]);
          for (double x : row)
            if (!std::isfinite(x))
              throw std::runtime_error("realization " + std::to_string(r) +
                                       ": non-finite observable");
          results[r][i] = row;
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        next.store(R);  // drain remaining work
        return;
      }
    }
  };

  int W = workers;
  if (W < 1) W = 1;
  W = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(W), R));
  if (W == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(W));
    for (int i = 0; i < W; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  EnsembleEstimate est;
  est.times = times;
  est.count = R;
  est.mean.resize(T);
  est.stderr_.resize(T);
  for (std::size_t i = 0; i < T; ++i) {
    for (int c = 0; c < 8; ++c) {
      Welford acc;
      for (std::size_t r = 0; r < R; ++r)
        acc.add(results[r][i][static_cast<std::size_t>(c)]);
      est.mean[i][static_cast<std::size_t>(c)] = acc.mean();
      est.stderr_[i][static_cast<std::size_t>(c)] = acc.stderror();
    }
  }
  return est;
}

}  // namespace rmx
