// acceptance.cpp: end-to-end checks of the shipped numerical claims.
// Prints one PASS/FAIL line per criterion and exits nonzero on any failure.
// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "rmx/dos.hpp"
#include "rmx/dynamics.hpp"
#include "rmx/mc.hpp"
#include "rmx/numerics.hpp"
#include "rmx/resolvent.hpp"
#include "rmx/state.hpp"
#include "rmx/vanhove.hpp"

namespace {

using rmx::Complex;
using rmx::DensityOfStates;
using rmx::ReducedState;

constexpr double kPi = 3.14159265358979323846;

int failures = 0;
std::chrono::steady_clock::time_point t_mark;

void mark() { t_mark = std::chrono::steady_clock::now(); }

void report(const std::string& name, bool pass, const std::string& detail) {
  const auto dt = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - t_mark)
                      .count();
  std::cout << name << ": " << (pass ? "PASS" : "FAIL") << " (" << detail
            << ", " << dt << " ms)" << std::endl;
  if (!pass) ++failures;
}

std::string sci(double x) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << x;
  return os.str();
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out;
  for (int i = 0; i < n; ++i)
    out.push_back(n == 1 ? a : a + (b - a) * double(i) / double(n - 1));
  return out;
}

// ---------------------------------------------------------------- C1
// Exact finite-n bookkeeping: trace and per-start-level transition sums
// stay at one to rounding for every sampled realization.
void c1_finite_n_bookkeeping() {
  mark();
  const auto dos = DensityOfStates::gaussian_convolution(1, 1.0, 0.0);
  const auto rho0 = ReducedState::general(0.6, 0.4, Complex(0.15, -0.1));
  const std::vector<double> times = {0.0, 0.7, 1.9, 4.2};
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const std::size_t n = 8 + (7 * k) % 57;
    rmx::InteractionSpec spec =
        (k % 4 == 3)
            ? rmx::InteractionSpec::banded(
                  0.4,
                  [](double x, double y) {
                    return std::exp(-0.5 * (x - y) * (x - y));
                  })
            : rmx::InteractionSpec::goe(0.4);
    const auto levels = dos.quantiles(n);
    const auto w = rmx::sample_interaction(spec, levels, 1000u + k);
    const auto h = rmx::assemble_hamiltonian(0.3, spec, levels, w);
    const std::size_t start = rmx::nearest_level_index(levels, 0.1);
    const auto traj = rmx::evolve_reduced(
        h, rmx::InitialState::pure_level(rho0, start), times);
    for (std::size_t i = 0; i < times.size(); ++i) {
      worst = std::max(worst,
                       std::abs(traj.rho[i].pp + traj.rho[i].mm - 1.0));
      for (int d = 0; d < 2; ++d)
        worst = std::max(worst, std::abs(traj.p[i].column_sum(d) - 1.0));
    }
  }
  report("C1 finite-n trace and transition bookkeeping", worst <= 1e-12,
         "max residual " + sci(worst) + " <= 1e-12 over 20 seeded systems");
}

// ---------------------------------------------------------------- C2
// A near-degenerate reservoir dressed by the coupling carries the
// semicircle spectral density of half-width 2v.
void c2_semicircle_limit() {
  mark();
  const auto dos = DensityOfStates::gaussian_convolution(1, 1e-3, 0.0);
  double worst = 0.0;
  for (const double lam : linspace(-1.9, 1.9, 39)) {
    const auto b = rmx::boundary_resolvent(dos, 0.0, 1.0, lam, 1e-3, 1e-12);
    const double want = std::sqrt(4.0 - lam * lam) / (2.0 * kPi);
    worst = std::max(worst, std::abs(b.nu(0) - want));
  }
  report("C2 narrow-reservoir semicircle density", worst <= 1e-3,
         "sup deviation " + sci(worst) + " <= 1e-3 on [-1.9, 1.9]");
}

// ---------------------------------------------------------------- C3
// Wide flat reservoir: populations relax at 4A and the coherence follows
// the two-rate pair generator, matching the closed form.
void c3_flat_regime() {
  mark();
  const double a = 3000.0;
  const auto dos = DensityOfStates::scaled_flat(rmx::FlatProfile::Gaussian, a);
  const double v = 1.0;
  const double A = kPi * v * v * dos.eval(0.0);
  const auto rho0 = ReducedState::general(0.55, 0.45, Complex(0.45, 0.0));
  double worst_diag = 0.0, worst_slope = 0.0;
  bool pass = true;
  std::ostringstream note;
  for (const double ratio : {0.0, 0.5, 0.9}) {
    const double s = ratio * A;
    const double gamma = 4.0 * A;
    const double theta = std::sqrt(std::max(0.0, A * A - s * s));
    const double r_pred = 2.0 * (A - theta);
    const double t1 = 5.0 / (2.0 * A);
    const double t2 = t1 + (r_pred > 0.0 ? 1.5 / r_pred : 1.25 / A);
    const auto diag_ts = linspace(0.0, 5.0 / gamma, 11);
    const auto fit_ts = linspace(t1, t2, 7);
    std::vector<double> times = diag_ts;
    times.insert(times.end(), fit_ts.begin(), fit_ts.end());
    const auto run = rmx::evolve_analytic(dos, s, v, 0.0, rho0, times);
    const auto closed = rmx::flat_regime_closed_form(A, s, rho0, times);
    for (int i = 0; i < 11; ++i) {
      worst_diag = std::max(worst_diag,
                            std::abs(run.rho[i].pp - closed.rho[i].pp));
      worst_diag = std::max(worst_diag,
                            std::abs(run.rho[i].mm - closed.rho[i].mm));
    }
    // least-squares slope of log |coherence| over the late window
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < 7; ++i) {
      const double x = times[11 + i];
      const double y = std::log(std::abs(run.rho[11 + i].pm));
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double slope = (7.0 * sxy - sx * sy) / (7.0 * sxx - sx * sx);
    const double err = std::abs(-slope - r_pred);
    worst_slope = std::max(worst_slope, err / std::max(r_pred, A));
    if (err > 0.05 * std::max(r_pred, A)) pass = false;
    note << " s/A=" << ratio << " slope_err=" << sci(err);
  }
  if (worst_diag > 1e-3) pass = false;
  report("C3 flat-regime closed form", pass,
         "max diag dev " + sci(worst_diag) + " <= 1e-3; slope errs" +
             note.str() + " (rel bound 0.05)");
}

// ---------------------------------------------------------------- C4
// Finite-n ensembles against the infinite-reservoir dynamics.
void c4_mc_vs_analytic() {
  mark();
  struct Set {
    DensityOfStates dos;
    double E, s, v, tmax;
    std::uint64_t seed;
  };
  const std::vector<Set> sets = {
      {DensityOfStates::gaussian_convolution(1, 1.0, 0.0), 0.0, 0.3, 0.35,
       10.0, 11u},
      {DensityOfStates::gaussian_convolution(4, 1.0, 0.0), 0.0, 0.35, 0.4,
       12.0, 12u},
      {DensityOfStates::lattice(1.0), 2.0, 0.25, 0.3, 20.0, 13u},
  };
  bool pass = true;
  double worst_excess = -1e9;
  for (const auto& set : sets) {
    const auto times = linspace(0.0, set.tmax, 21);
    rmx::EnsembleModel model;
    model.dos = set.dos;
    model.spec = rmx::InteractionSpec::goe(set.v);
    model.s = set.s;
    model.n = 256;
    model.energy = set.E;
    model.rho0 = ReducedState::diagonal(1.0, 0.0);
    const auto mc = rmx::mc_average(model, 200, set.seed, times, 1);
    const auto an = rmx::evolve_analytic(set.dos, set.s, set.v, set.E,
                                         model.rho0, times);
    for (std::size_t i = 0; i < times.size(); ++i)
      for (int c = 0; c < 2; ++c) {
        const double ref = c == 0 ? an.rho[i].pp : an.rho[i].mm;
        const double dev = std::abs(mc.mean[i][c] - ref);
        const double allow = 3.0 * mc.stderr_[i][c] + 0.02;
        worst_excess = std::max(worst_excess, dev - allow);
        if (dev > allow) pass = false;
      }
  }
  report("C4 finite-n ensembles match the infinite-n dynamics", pass,
         "worst dev-minus-allowance " + sci(worst_excess) +
             " <= 0 over 3 models x 21 times (allowance 3 stderr + 0.02)");
}

// ---------------------------------------------------------------- C5
// Weak coupling in rescaled time approaches the exchange closed form.
void c5_weak_coupling_limit() {
  mark();
  const auto dos = DensityOfStates::gaussian_convolution(1, 1.0, 0.0);
  const double E = 0.0, s = 0.25, v = 0.05;
  const auto rho0 = ReducedState::diagonal(1.0, 0.0);
  const auto taus = linspace(0.0, 0.636, 25);
  const auto vh = rmx::vanhove_reduced(dos, E, s, rho0, taus);
  std::vector<double> times;
  for (const double tau : taus) times.push_back(tau / (v * v));
  rmx::EvolveOptions opt;
  opt.eta = 2e-4;
  const auto ev = rmx::evolve_analytic(dos, s, v, E, rho0, times, opt);
  double worst = 0.0;
  for (std::size_t i = 0; i < taus.size(); ++i) {
    worst = std::max(worst, std::abs(vh.rho[i].pp - ev.rho[i].pp));
    worst = std::max(worst, std::abs(vh.rho[i].mm - ev.rho[i].mm));
  }
  report("C5 weak-coupling rescaled-time limit", worst <= 0.02,
         "max population dev " + sci(worst) + " <= 2e-2 over 25 times");
}

// ---------------------------------------------------------------- C6
// Band-kernel stationary occupations carry the gibbs weights exactly.
void c6_band_detailed_balance() {
  mark();
  double worst = 0.0;
  for (const double beta : {0.0, 0.5, 1.0})
    for (const double s : {0.25, 0.5}) {
      const auto sys = rmx::band_master(0.4, s, beta);
      const auto st = sys.stationary();
      const double z = 2.0 * std::cosh(beta * s);
      worst = std::max(worst, std::abs(st.first - std::exp(-beta * s) / z));
      worst = std::max(worst, std::abs(st.second - std::exp(beta * s) / z));
      worst = std::max(
          worst, std::abs(st.first / st.second - std::exp(-2.0 * beta * s)));
    }
  report("C6 band stationary detailed balance", worst <= 1e-12,
         "max deviation " + sci(worst) + " <= 1e-12 over 6 (beta, s) pairs");
}

// ---------------------------------------------------------------- C7
// The spectral-density ratio converges to the gibbs factor at rate 1/J.
void c7_tail_ratio_convergence() {
  mark();
  // v = 0.1 keeps the coupling correction well below the 1/J tail
  // curvature, so the error sequence exposes the convergence rate.
  const auto family = DensityOfStates::gaussian_convolution(1, 1.0, 0.0);
  const double s = 0.5, v = 0.1, e = -1.0;
  std::vector<double> errs;
  for (const int J : {8, 16, 32}) {
    const auto r = rmx::tail_ratio(family, s, v, J, e, 0);
    errs.push_back(std::abs(r.ratio - r.limit));
  }
  const double C = 0.5 * (8.0 * errs[0] + 16.0 * errs[1]);
  const bool monotone = errs[0] > errs[1] && errs[1] > errs[2];
  const bool rate_ok = errs[2] <= 2.0 * C / 32.0;
  report("C7 tail ratio approaches the gibbs factor", monotone && rate_ok,
         "errs J=8,16,32: " + sci(errs[0]) + ", " + sci(errs[1]) + ", " +
             sci(errs[2]) + (monotone ? "; monotone" : "; NOT monotone") +
             "; 1/J bound " + sci(2.0 * C / 32.0));
}

// ---------------------------------------------------------------- C8
// Microcanonical and canonical occupations agree at matched energy.
void c8_ensemble_equivalence() {
  mark();
  const double beta = 0.5, s = 0.5, v = 0.3, h = 1e-3;
  std::vector<double> devs;
  for (const int J : {8, 16, 32}) {
    const auto dos = DensityOfStates::gaussian_convolution(J, 1.0, 0.0);
    const double lambda = -beta * double(J);  // energy of temperature beta
    const auto micro = rmx::equilibrium_microcanonical(dos, s, v, lambda, h);
    const auto canon = rmx::equilibrium_canonical(dos, s, v, beta, h);
    devs.push_back(std::abs(micro.pp - canon.pp) / canon.pp);
  }
  const bool pass = devs[0] > devs[1] && devs[1] > devs[2] && devs[2] <= 0.05;
  report("C8 microcanonical-canonical agreement", pass,
         "rel devs J=8,16,32: " + sci(devs[0]) + ", " + sci(devs[1]) + ", " +
             sci(devs[2]) + "; J=32 bound 5e-2");
}

// ---------------------------------------------------------------- C9
// Banded self-energy: flat-kernel reduction, the wide-flat lorentzian
// closed form, and the narrowed population rate.
DensityOfStates cosine_band() {
  std::vector<double> grid, vals;
  for (int j = 0; j <= 800; ++j) {
    const double x = -2.0 + 4.0 * double(j) / 800.0;
    grid.push_back(x);
    vals.push_back(2.5 - 0.5 * std::cos(kPi * x / 2.0));
  }
  return DensityOfStates::tabulated(grid, vals);
}

std::pair<Complex, Complex> lorentz_map_fixed_point(double A, double b,
                                                    double E, double s,
                                                    Complex z) {
  const double sg = z.imag() >= 0.0 ? 1.0 : -1.0;
  Complex dp(0.0, 0.0), dm(0.0, 0.0);
  for (int it = 0; it < 200000; ++it) {
    const Complex np = A * b / (E + s - z - dm - Complex(0.0, sg * b));
    const Complex nm = A * b / (E - s - z - dp - Complex(0.0, sg * b));
    const double res = std::abs(np - dp) + std::abs(nm - dm);
    dp = 0.5 * (dp + np);
    dm = 0.5 * (dm + nm);
    if (res < 1e-14) break;
  }
  return {dp, dm};
}

void c9_banded_reductions() {
  // (i) flat kernel: the field collapses to the one-point solution and the
  // two-argument operator image matches the scalar kernel; node doubling
  // moves the answer by far less than the acceptance tolerance.
  mark();
  {
    const auto dos = cosine_band();
    const double s = 0.4, v = 0.3;
    const Complex z1(0.25, 1.2), z2(-0.4, 1.05);
    rmx::BandKernel kernel;
    kernel.f = [](double, double) { return 1.0; };
    const auto pair1 = rmx::solve_pair(dos, s, v, z1, 1e-13);

    const auto Es1 = dos.quantiles(1024);
    const auto f1 = rmx::solve_self_energy(dos, s, v, kernel, Es1, {z1});
    double dev_field = 0.0;
    for (std::size_t j = 0; j < Es1.size(); ++j) {
      dev_field = std::max(dev_field,
                           std::abs(f1.delta_p[0][j] - v * v * pair1.rp));
      dev_field = std::max(dev_field,
                           std::abs(f1.delta_m[0][j] - v * v * pair1.rm));
    }

    const auto Es2 = dos.quantiles(2048);
    const auto f2 = rmx::solve_self_energy(dos, s, v, kernel, Es2, {z1, z2});
    const double doubling =
        std::abs(f1.delta_p[0][512] - f2.delta_p[0][1024]);
    const auto band = rmx::band_two_point(kernel, f2, 0, 1);
    const auto scalar = rmx::two_point_scalar(dos, s, v, z1, z2, 1e-13);
    double dev_r2 = 0.0;
    for (int p = 0; p < 4; ++p)
      dev_r2 = std::max(
          dev_r2, std::abs(band.s_line[p][1024] / (v * v) - scalar.r2[p]));
    const bool pass = dev_field <= 1e-8 && dev_r2 <= 1e-8 && doubling < 1e-6;
    report("C9a flat-kernel self-energy reduction", pass,
           "field dev " + sci(dev_field) + " <= 1e-8; pair dev " +
               sci(dev_r2) + " <= 1e-8; doubling " + sci(doubling) +
               " < 1e-6");
  }

  // (ii) wide flat reservoir with a lorentzian kernel: the numeric field
  // obeys the two-parameter closed map.
  mark();
  {
    const double a = 1000.0, b = 1.0, w0 = 1.0, A = 0.002, s = 0.3;
    const auto dos =
        DensityOfStates::scaled_flat(rmx::FlatProfile::Gaussian, a);
    const double v2 = A / (kPi * w0 * dos.eval(0.0));
    const double v = std::sqrt(v2);
    rmx::BandKernel kernel;
    kernel.f = [b, w0](double x, double y) {
      const double u = (x - y) / b;
      return w0 / (1.0 + u * u);
    };
    kernel.width = b;
    const auto Es = dos.quantiles(24000);
    const std::vector<Complex> zs = {Complex(0.2, 0.4), Complex(-0.3, 0.15),
                                     Complex(0.2, -0.4)};
    const auto field = rmx::solve_self_energy(dos, s, v, kernel, Es, zs);
    double dev_map = 0.0, dev_conj = 0.0;
    for (const double target : {0.0, 0.7}) {
      const std::size_t j = rmx::nearest_level_index(Es, target);
      for (std::size_t iz = 0; iz < zs.size(); ++iz) {
        const auto want =
            lorentz_map_fixed_point(A, b, Es[j], s, zs[iz]);
        dev_map = std::max(dev_map,
                           std::abs(field.delta_p[iz][j] - want.first));
        dev_map = std::max(dev_map,
                           std::abs(field.delta_m[iz][j] - want.second));
      }
      dev_conj = std::max(
          dev_conj, std::abs(field.delta_p[2][j] -
                             std::conj(field.delta_p[0][j])));
    }
    const bool pass = dev_map <= 1e-4 && dev_conj <= 1e-10;
    report("C9b lorentzian-kernel closed map", pass,
           "map dev " + sci(dev_map) + " <= 1e-4; conj dev " +
               sci(dev_conj) + " <= 1e-10 (n = 24000, 3 arguments)");
  }

  // (iii) splitting comparable to the band width narrows the population
  // rate to gamma b^2/(s^2+b^2): once from the self-energy field, once
  // from a fitted band trajectory.
  mark();
  {
    const double a = 1000.0, b = 1.0, w0 = 1.0, A = 0.002, s = 1.0;
    const auto dos =
        DensityOfStates::scaled_flat(rmx::FlatProfile::Gaussian, a);
    const double v2 = A / (kPi * w0 * dos.eval(0.0));
    rmx::BandKernel kernel;
    kernel.f = [b, w0](double x, double y) {
      const double u = (x - y) / b;
      return w0 / (1.0 + u * u);
    };
    kernel.width = b;

    // closed map at essentially real argument reproduces the algebra
    const auto alg = lorentz_map_fixed_point(A, b, 0.0, s, Complex(0, 1e-9));
    const double im_pred = A * b * b / (s * s + b * b);
    const double dev_alg = std::abs(alg.first.imag() - im_pred);

    // numeric field at small height: narrowed population rate within 2%
    const auto Es = dos.quantiles(40000);
    const Complex z(0.0, 0.15);
    const auto field = rmx::solve_self_energy(dos, s, std::sqrt(v2), kernel,
                                              Es, {z});
    const std::size_t j0 = rmx::nearest_level_index(Es, 0.0);
    const auto map_z = lorentz_map_fixed_point(A, b, Es[j0], s, z);
    const double dev_field =
        std::max(std::abs(field.delta_p[0][j0] - map_z.first),
                 std::abs(field.delta_m[0][j0] - map_z.second));
    const double gamma1_num = 2.0 * (field.delta_p[0][j0].imag() +
                                     field.delta_m[0][j0].imag());
    const double gamma1_pred = 4.0 * A * b * b / (s * s + b * b);
    const double dev_rate =
        std::abs(gamma1_num - gamma1_pred) / gamma1_pred;

    // trajectory route: fitted relaxation of the band system vs the same
    // narrowing formula with A = pi w0 (unit local density, rescaled time)
    const double s_b = 0.05, w0_b = 0.5;
    const double w2s = w0_b / (1.0 + (2.0 * s_b / b) * (2.0 * s_b / b));
    const auto taus = linspace(0.0, 1.2, 601);
    const auto run = rmx::vanhove_band(w2s, s_b, 0.0,
                                       ReducedState::diagonal(1.0, 0.0),
                                       taus);
    std::vector<double> pp, pm;
    for (const auto& r : run.trajectory.rho) {
      pp.push_back(r.pp);
      pm.push_back(r.mm);
    }
    const auto fit = rmx::fit_master_system(taus, pp, pm);
    const double gamma_fit = fit.g_p + fit.g_m;
    const double gamma_formula =
        4.0 * (kPi * w0_b) * b * b / (s_b * s_b + b * b);
    const double dev_fit =
        std::abs(gamma_fit - gamma_formula) / gamma_formula;

    const bool pass = dev_alg <= 1e-4 && dev_field <= 1e-4 &&
                      dev_rate <= 0.02 && dev_fit <= 0.02;
    report("C9c narrowed population rate", pass,
           "algebra dev " + sci(dev_alg) + "; field dev " + sci(dev_field) +
               " <= 1e-4; rate devs field " + sci(dev_rate) + ", fit " +
               sci(dev_fit) + " <= 2e-2");
  }
}

// ---------------------------------------------------------------- C10
// A generic exchange trajectory is three-mode and cannot be generated by
// any two-state master system, while band trajectories can.
void c10_mode_discrimination() {
  mark();
  const auto dos = DensityOfStates::gaussian_convolution(1, 1.0, 0.0);
  const double E = -1.0, s = 0.4;
  const auto rho0 = ReducedState::diagonal(0.7, 0.3);
  const auto modes = rmx::vanhove_modes(dos, E, s, 0, rho0);
  const double h = 5e-4 / modes.gamma_own;
  const int count = int(std::floor(2.5 / h)) + 1;
  std::vector<double> taus;
  for (int i = 0; i < count; ++i) taus.push_back(double(i) * h);
  const auto traj = rmx::vanhove_reduced(dos, E, s, rho0, taus);
  std::vector<double> pp, pm;
  for (const auto& r : traj.rho) {
    pp.push_back(r.pp);
    pm.push_back(r.mm);
  }
  const double generic_residual =
      rmx::fit_master_system(taus, pp, pm).residual;

  const auto band = rmx::vanhove_band(0.5, 0.5, 0.5,
                                      ReducedState::diagonal(0.8, 0.2),
                                      linspace(0.0, 2.5, 25001));
  std::vector<double> bpp, bpm;
  for (const auto& r : band.trajectory.rho) {
    bpp.push_back(r.pp);
    bpm.push_back(r.mm);
  }
  const double band_residual =
      rmx::fit_master_system(linspace(0.0, 2.5, 25001), bpp, bpm).residual;

  const bool pass = generic_residual >= 1e-3 && band_residual <= 1e-10;
  report("C10 three-mode vs two-state discrimination", pass,
         "generic residual " + sci(generic_residual) +
             " >= 1e-3; band residual " + sci(band_residual) + " <= 1e-10");
}

}  // namespace

int main() {
  std::cout << "acceptance: relaxation toolkit end-to-end criteria"
            << std::endl;
  c1_finite_n_bookkeeping();
  c2_semicircle_limit();
  c3_flat_regime();
  c4_mc_vs_analytic();
  c5_weak_coupling_limit();
  c6_band_detailed_balance();
  c7_tail_ratio_convergence();
  c8_ensemble_equivalence();
  c9_banded_reductions();
  c10_mode_discrimination();
  std::cout << (failures == 0 ? "acceptance: ALL PASS"
                              : "acceptance: FAILURES " +
                                    std::to_string(failures))
            << std::endl;
  return failures == 0 ? 0 : 1;
}
