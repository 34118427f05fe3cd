// vanhove.cpp: weak-coupling closed forms and two-state master systems.
// SPDX-License-Identifier: Apache-2.0
#include "rmx/vanhove.hpp"

#include <cmath>
#include <stdexcept>

namespace rmx {

double VanHoveModes::at(double tau) const {
  return stationary + amp_own * std::exp(-gamma_own * tau) +
         amp_cross * std::exp(-gamma_cross * tau);
}

VanHoveModes vanhove_modes(const DensityOfStates& dos, double E, double s,
                           int idx, const ReducedState& rho0) {
  const double a = spin_sign(idx);
  const double u = dos.eval(E);
  const double up = dos.eval(E + 2.0 * s * a);
  const double um = dos.eval(E - 2.0 * s * a);
  if (!std::isfinite(u) || !std::isfinite(up) || !std::isfinite(um))
    throw std::invalid_argument("density not finite at the exchange energies");
  const double own0 = rho0.diag(idx);
  const double cross0 = rho0.diag(1 - idx);

  VanHoveModes m;
  m.gamma_own = 2.0 * M_PI * (u + up);
  m.gamma_cross = 2.0 * M_PI * (u + um);
  if (u + up > 0.0) {
    m.stationary = u / (u + up) * own0;
    m.amp_own = up / (u + up) * own0;
  } else {
    m.stationary = own0;  // no exchange partner: channel frozen
  }
  if (um + u > 0.0) {
    m.stationary += um / (um + u) * cross0;
    m.amp_cross = -um / (um + u) * cross0;
  }
  return m;
}

VanHoveTrajectory vanhove_reduced(const DensityOfStates& dos, double E,
                                  double s, const ReducedState& rho0,
                                  const std::vector<double>& taus) {
  VanHoveTrajectory out;
  out.tau = taus;
  out.modes_p = vanhove_modes(dos, E, s, 0, rho0);
  out.modes_m = vanhove_modes(dos, E, s, 1, rho0);
  out.rho.reserve(taus.size());
  for (double tau : taus)
    out.rho.push_back(
        ReducedState::diagonal(out.modes_p.at(tau), out.modes_m.at(tau)));
  return out;
}

std::pair<double, double> MasterSystem::stationary(double total) const {
  const double g = g_p + g_m;
  if (g <= 0.0) return {0.5 * total, 0.5 * total};
  return {g_m / g * total, g_p / g * total};
}

std::pair<double, double> MasterSystem::solve(double p_p0, double p_m0,
                                              double tau) const {
  const double total = p_p0 + p_m0;
  const double g = g_p + g_m;
  if (g <= 0.0) return {p_p0, p_m0};
  const double pinf = g_m / g * total;
  const double pp = pinf + (p_p0 - pinf) * std::exp(-g * tau);
  return {pp, total - pp};
}

VanHoveTrajectory master_solve(const MasterSystem& system,
                               const ReducedState& rho0,
                               const std::vector<double>& taus) {
  if (!(std::isfinite(system.g_p) && std::isfinite(system.g_m)) ||
      system.g_p < 0.0 || system.g_m < 0.0)
    throw std::invalid_argument("master rates must be finite and nonnegative");
  VanHoveTrajectory out;
  out.tau = taus;
  const double p0 = rho0.diag(0);
  const double m0 = rho0.diag(1);
  const auto st = system.stationary(p0 + m0);
  const double g = system.relaxation_rate();
  out.modes_p = {st.first, p0 - st.first, 0.0, g, g};
  out.modes_m = {st.second, m0 - st.second, 0.0, g, g};
  out.rho.reserve(taus.size());
  for (double tau : taus) {
    const auto p = system.solve(p0, m0, tau);
    out.rho.push_back(ReducedState::diagonal(p.first, p.second));
  }
  return out;
}

MasterSystem band_master(double w2s, double s, double beta) {
  if (!(w2s > 0.0))
    throw std::invalid_argument("form factor at the level splitting must be positive");
  MasterSystem sys;
  sys.g_p = 2.0 * M_PI * w2s * std::exp(beta * s);
  sys.g_m = 2.0 * M_PI * w2s * std::exp(-beta * s);
  return sys;
}

BandVanHove vanhove_band(double w2s, double s, double beta,
                         const ReducedState& rho0,
                         const std::vector<double>& taus) {
  BandVanHove out;
  out.system = band_master(w2s, s, beta);
  out.trajectory = master_solve(out.system, rho0, taus);
  return out;
}

RateEstimates rescaled_rate(const DensityOfStates& dos, double E, double s,
                            double v_sq, int idx) {
  if (!(v_sq >= 0.0))
    throw std::invalid_argument("squared coupling must be nonnegative");
  const double a = spin_sign(idx);
  RateEstimates r;
  r.rate_half_shift = 4.0 * M_PI * v_sq * (dos.eval(E) + dos.eval(E + s * a));
  r.rate_full_shift =
      2.0 * M_PI * v_sq * (dos.eval(E) + dos.eval(E + 2.0 * s * a));
  return r;
}

BandRates band_regime_rates(double A, double s, double b) {
  if (!(A > 0.0) || !(b > 0.0))
    throw std::invalid_argument("rate scale and band width must be positive");
  BandRates r;
  r.gamma = 4.0 * A;
  r.gamma_pop = r.gamma * b * b / (s * s + b * b);
  return r;
}

MasterFit fit_master_system(const std::vector<double>& taus,
                            const std::vector<double>& p_p,
                            const std::vector<double>& p_m) {
  const std::size_t N = taus.size();
  if (N < 5 || p_p.size() != N || p_m.size() != N)
    throw std::invalid_argument("fit needs at least five matched samples");
  const double h = taus[1] - taus[0];
  for (std::size_t i = 0; i + 1 < N; ++i)
    if (std::abs(taus[i + 1] - taus[i] - h) > 1e-9 * std::max(1.0, std::abs(h)))
      throw std::invalid_argument("fit needs a uniform tau grid");

  // Five-point central derivative of p_p on the interior.
  std::vector<double> d(N, 0.0);
  for (std::size_t i = 2; i + 2 < N; ++i)
    d[i] = (p_p[i - 2] - 8.0 * p_p[i - 1] + 8.0 * p_p[i + 1] - p_p[i + 2]) /
           (12.0 * h);

  // Least squares for dp_p/dtau = -g_p p_p + g_m p_m on interior points.
  double spp = 0.0, spm = 0.0, smm = 0.0, bp = 0.0, bm = 0.0;
  for (std::size_t i = 2; i + 2 < N; ++i) {
    spp += p_p[i] * p_p[i];
    spm += p_p[i] * p_m[i];
    smm += p_m[i] * p_m[i];
    bp += d[i] * p_p[i];
    bm += d[i] * p_m[i];
  }
  // Normal equations for x = (g_p, g_m): minimize |d + g_p pp - g_m pm|^2.
  const double det = spp * smm - spm * spm;
  MasterFit fit;
  if (std::abs(det) > 1e-300) {
    fit.g_p = (-bp * smm + bm * spm) / det;
    fit.g_m = (-bp * spm + bm * spp) / det;
  }
  for (std::size_t i = 2; i + 2 < N; ++i) {
    const double r = d[i] + fit.g_p * p_p[i] - fit.g_m * p_m[i];
    fit.residual = std::max(fit.residual, std::abs(r));
  }
  return fit;
}

}  // namespace rmx
