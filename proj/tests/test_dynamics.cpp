// test_dynamics.cpp: closed forms, two-argument kernels, analytic evolution.
// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "rmx/dos.hpp"
#include "rmx/dynamics.hpp"
#include "rmx/numerics.hpp"
#include "rmx/resolvent.hpp"
#include "rmx/vanhove.hpp"

namespace {

using rmx::Complex;
using rmx::DensityOfStates;
using rmx::ReducedState;
using rmx::pair_index;

TEST_CASE("flat-regime closed form: telegraph populations, two-rate pair") {
  const double A = 0.5, s = 0.3;
  const auto rho0 = ReducedState::general(0.75, 0.25, Complex(0.2, -0.1));
  std::vector<double> times;
  for (int i = 0; i <= 12; ++i) times.push_back(0.35 * i);
  const auto run = rmx::flat_regime_closed_form(A, s, rho0, times);

  for (std::size_t i = 0; i < times.size(); ++i) {
    const double e = std::exp(-4.0 * A * times[i]);
    CHECK(run.rho[i].pp ==
          doctest::Approx(0.5 + (0.75 - 0.5) * e).epsilon(1e-14));
    CHECK(run.rho[i].pp + run.rho[i].mm == doctest::Approx(1.0).epsilon(1e-14));
    for (int d = 0; d < 2; ++d)
      CHECK(run.prob[i].column_sum(d) == doctest::Approx(1.0).epsilon(1e-14));
  }

  // the coherence obeys the two-rate recurrence with lambda = -2A +- 2 theta
  const double theta = std::sqrt(A * A - s * s);
  const double h = 0.35;
  const double u = std::exp((-2.0 * A + 2.0 * theta) * h);
  const double w = std::exp((-2.0 * A - 2.0 * theta) * h);
  for (std::size_t i = 0; i + 2 < times.size(); ++i) {
    const Complex want =
        (u + w) * run.rho[i + 1].pm - (u * w) * run.rho[i].pm;
    CHECK(std::abs(run.rho[i + 2].pm - want) < 1e-12);
  }

  CHECK_THROWS_AS(rmx::flat_regime_closed_form(0.0, s, rho0, times),
                  std::invalid_argument);
  CHECK_THROWS_AS(rmx::flat_regime_closed_form(-1.0, s, rho0, times),
                  std::invalid_argument);
}

TEST_CASE("flat-regime real part is conserved without splitting") {
  const double A = 0.4;
  const auto rho0 = ReducedState::general(0.5, 0.5, Complex(0.3, 0.2));
  const auto run =
      rmx::flat_regime_closed_form(A, 0.0, rho0, {0.0, 0.5, 1.5, 3.0});
  for (std::size_t i = 0; i < run.times.size(); ++i) {
    CHECK(run.rho[i].pm.real() == doctest::Approx(0.3).epsilon(1e-13));
    CHECK(run.rho[i].pm.imag() ==
          doctest::Approx(0.2 * std::exp(-4.0 * A * run.times[i]))
              .epsilon(1e-12));
  }
}

TEST_CASE("flat-regime populations fit a pure two-state system") {
  const double A = 0.45;
  std::vector<double> taus, pp, pm;
  for (int i = 0; i <= 100; ++i) {
    taus.push_back(0.05 * i);
    const double e = std::exp(-4.0 * A * taus.back());
    pp.push_back(0.5 + 0.4 * e);
    pm.push_back(0.5 - 0.4 * e);
  }
  const auto fit = rmx::fit_master_system(taus, pp, pm);
  CHECK(fit.g_p == doctest::Approx(2.0 * A).epsilon(1e-3));
  CHECK(fit.g_m == doctest::Approx(2.0 * A).epsilon(1e-3));
  CHECK(fit.residual < 1e-5);
}

TEST_CASE("two-argument kernel matches direct quadrature of the dressed pair") {
  const auto dos = DensityOfStates::gaussian_convolution(1, 1.0, 0.0);
  const double s = 0.3, v = 0.4;
  const Complex z1(0.3, 0.8), z2(-0.2, 0.6);
  const auto k = rmx::two_point_scalar(dos, s, v, z1, z2, 1e-12);
  CHECK(!k.flagged);
  const double v2 = v * v;
  const auto ge = [&](double E, int spin, const Complex& z,
                      const std::array<Complex, 2>& r) {
    const double sg = spin == 0 ? 1.0 : -1.0;
    return 1.0 / (Complex(E + sg * s, 0.0) - z - v2 * r[1 - spin]);
  };
  for (int a = 0; a < 2; ++a)
    for (int d = 0; d < 2; ++d) {
      const Complex direct = rmx::gk_adaptive_complex(
          [&](double E) {
            return dos.eval(E) * ge(E, a, z1, k.r_z1) * ge(E, d, z2, k.r_z2);
          },
          -12.0, 12.0, 1e-12);
      CHECK(std::abs(k.r2[pair_index(a, d)] - direct) < 1e-8);
    }
}

TEST_CASE("coincident-argument kernel is the fixed-point derivative") {
  const auto dos = DensityOfStates::gaussian_convolution(1, 1.0, 0.0);
  const double s = 0.3, v = 0.4;
  const Complex z1(0.1, 0.7);
  const Complex z2 = z1 - Complex(1e-6, 0.0);
  const auto k = rmx::two_point_scalar(dos, s, v, z1, z2, 1e-13);
  const auto pair = rmx::solve_pair(dos, s, v, z1, 1e-13);
  const auto [dp, dm] = rmx::pair_derivs(dos, s, v, z1, pair);
  CHECK(std::abs(k.r2[pair_index(0, 0)] - dp / (1.0 + v * v * dm)) < 1e-4);
  CHECK(std::abs(k.r2[pair_index(1, 1)] - dm / (1.0 + v * v * dp)) < 1e-4);

  // truly coincident arguments are flagged
  const auto same = rmx::two_point_scalar(dos, s, v, z1, z1, 1e-13);
  CHECK(same.flagged);
  CHECK(same.min_denom < 1e-9);

  CHECK_THROWS_AS(
      rmx::two_point_scalar(dos, s, v, Complex(0.5, 0.0), z2, 1e-12),
      std::invalid_argument);
}

TEST_CASE("assembled pair correlator: support and weak-coupling limit") {
  const auto dos = DensityOfStates::gaussian_convolution(1, 1.0, 0.0);
  const double s = 0.3;
  const Complex z1(0.3, 0.8), z2(-0.2, 0.6);
  const double E = 0.4;

  const auto k = rmx::two_point_scalar(dos, s, 0.4, z1, z2, 1e-12);
  for (int a = 0; a < 2; ++a)
    for (int d = 0; d < 2; ++d)
      for (int b = 0; b < 2; ++b)
        for (int g = 0; g < 2; ++g) {
          const bool own = (b == a && g == d);
          const bool cross = (b == 1 - a && g == 1 - d);
          if (!own && !cross)
            CHECK(k.assembled(E, a, b, g, d) == Complex(0.0, 0.0));
        }

  // v -> 0: the own term becomes the bare propagator product and the
  // exchange term vanishes at second order
  const double v = 1e-3;
  const auto weak = rmx::two_point_scalar(dos, s, v, z1, z2, 1e-13);
  for (int a = 0; a < 2; ++a)
    for (int d = 0; d < 2; ++d) {
      const double sa = a == 0 ? s : -s;
      const double sd = d == 0 ? s : -s;
      const Complex bare =
          1.0 / ((Complex(E + sa, 0.0) - z1) * (Complex(E + sd, 0.0) - z2));
      const Complex own = weak.assembled(E, a, a, d, d);
      CHECK(std::abs(own - bare) < 1e-4 * std::abs(bare));
      const Complex cross = weak.assembled(E, a, 1 - a, 1 - d, d);
      CHECK(std::abs(cross) < 1e-4 * std::abs(bare));
    }
}

DensityOfStates cosine_band() {
  std::vector<double> grid, vals;
  for (int j = 0; j <= 800; ++j) {
    const double x = -2.0 + 4.0 * double(j) / 800.0;
    grid.push_back(x);
    vals.push_back(2.5 - 0.5 * std::cos(M_PI * x / 2.0));
  }
  return DensityOfStates::tabulated(grid, vals);
}

TEST_CASE("banded two-argument kernel reduces to the scalar one at f = 1") {
  const auto dos = cosine_band();
  const double s = 0.4, v = 0.3;
  const Complex z1(0.25, 1.2), z2(-0.4, 1.05);
  rmx::BandKernel kernel;
  kernel.f = [](double, double) { return 1.0; };
  const auto Es = dos.quantiles(512);
  const auto field = rmx::solve_self_energy(dos, s, v, kernel, Es, {z1, z2});
  const auto band = rmx::band_two_point(kernel, field, 0, 1);
  const auto scalar = rmx::two_point_scalar(dos, s, v, z1, z2, 1e-13);
  const double v2 = v * v;
  CHECK(!band.near_singular);
  for (int p = 0; p < 4; ++p) {
    REQUIRE(band.s_line[p].size() == Es.size());
    CHECK(band.min_singular[p] > 0.0);
    CHECK(band.min_singular[p] <= 1.5);
    // the operator image of 1 is v^2 r2 for a flat form factor
    CHECK(std::abs(band.s_line[p][100] / v2 - scalar.r2[p]) < 2e-7);
    CHECK(std::abs(band.s_line[p][400] / v2 - scalar.r2[p]) < 2e-7);
    // the resolved ladder matches the scalar resummation
    const Complex lad =
        scalar.r2[p] /
        (1.0 - v2 * v2 * scalar.r2[p] * scalar.r2[3 - p]);
    CHECK(std::abs(band.resolved[p][250] / v2 - lad) < 1e-6);
  }
  CHECK_THROWS_AS(rmx::band_two_point(kernel, field, 0, 5),
                  std::invalid_argument);
}

TEST_CASE("conjugate arguments make the diagonal-pair image positive") {
  const auto dos = cosine_band();
  const double s = 0.25, v = 0.3;
  const Complex z(0.1, 0.8);
  rmx::BandKernel kernel;
  kernel.f = [](double, double) { return 1.0; };
  const auto Es = dos.quantiles(256);
  const auto field =
      rmx::solve_self_energy(dos, s, v, kernel, Es, {z, std::conj(z)});
  const auto band = rmx::band_two_point(kernel, field, 0, 1);
  for (int a = 0; a < 2; ++a) {
    const int p = pair_index(a, a);
    for (std::size_t j = 0; j < Es.size(); j += 51) {
      CHECK(band.s_line[p][j].imag() == doctest::Approx(0.0).epsilon(1e-12));
      CHECK(band.s_line[p][j].real() > 0.0);
    }
  }
}

TEST_CASE("analytic evolution input validation") {
  const auto dos = DensityOfStates::gaussian_convolution(1, 1.0, 0.0);
  const auto rho0 = ReducedState::diagonal(1.0, 0.0);
  const std::vector<double> times = {0.0, 1.0};
  CHECK_THROWS_WITH_AS(
      rmx::evolve_analytic(dos, 0.3, 0.0, 0.0, rho0, times),
      doctest::Contains("coupling"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      rmx::evolve_analytic(dos, 0.3, 0.35, 0.0, rho0, {0.0, -1.0}),
      doctest::Contains("negative time"), std::invalid_argument);
  ReducedState bad;
  bad.pp = 0.7;
  bad.mm = 0.7;
  CHECK_THROWS_WITH_AS(rmx::evolve_analytic(dos, 0.3, 0.35, 0.0, bad, times),
                       doctest::Contains("rho0"), std::invalid_argument);
  const auto sc = DensityOfStates::scaled_flat(rmx::FlatProfile::Semicircle,
                                               1.0);
  CHECK_THROWS_WITH_AS(
      rmx::evolve_analytic(sc, 0.3, 0.35, 3.0, rho0, times),
      doctest::Contains("density"), std::invalid_argument);
}

TEST_CASE("analytic evolution: start, decay, stationarity, diagnostics") {
  const auto dos = DensityOfStates::gaussian_convolution(1, 1.0, 0.0);
  const double s = 0.3, v = 0.35, E = 0.0;
  const auto rho0 = ReducedState::general(0.8, 0.2, Complex(0.1, 0.15));
  std::vector<double> times;
  for (int i = 0; i <= 16; ++i) times.push_back(0.5 * i);
  const auto run = rmx::evolve_analytic(dos, s, v, E, rho0, times);

  CHECK(run.rho[0].pp == doctest::Approx(0.8).epsilon(2e-4));
  CHECK(run.rho[0].mm == doctest::Approx(0.2).epsilon(8e-4));
  CHECK(std::abs(run.rho[0].pm - rho0.pm) < 2e-4);

  // probabilities are reported raw, so sums carry the quadrature residual
  for (std::size_t i = 0; i < times.size(); ++i) {
    CHECK(run.rho[i].pp + run.rho[i].mm == doctest::Approx(1.0).epsilon(2e-3));
    for (int d = 0; d < 2; ++d)
      CHECK(run.prob[i].column_sum(d) == doctest::Approx(1.0).epsilon(2e-3));
  }

  // the regular part decays and the split reassembles the populations
  CHECK(std::abs(run.regular_component[0].back()) <
        0.1 * std::abs(run.regular_component[0].front()));
  for (std::size_t i = 0; i < times.size(); ++i)
    CHECK(run.stationary_component[0] + run.regular_component[0][i] ==
          doctest::Approx(run.rho[i].pp).epsilon(1e-3));

  CHECK(run.diag.column_sum_residual < 1e-3);
  CHECK(run.diag.hermiticity_residual < 1e-6);
  CHECK(run.diag.tail_estimate < 1e-3);

  // late-time state approaches the separately computed stationary state
  const auto st = rmx::stationary_reduced(dos, s, v, E, rho0);
  CHECK(run.stationary.pp == doctest::Approx(st.rho.pp).epsilon(1e-3));
  CHECK(run.stationary.mm == doctest::Approx(st.rho.mm).epsilon(1e-3));
  CHECK(std::abs(run.rho.back().pp - st.rho.pp) < 5e-3);
}

TEST_CASE("analytic evolution is linear in the initial state") {
  const auto dos = DensityOfStates::gaussian_convolution(1, 1.0, 0.0);
  const double s = 0.3, v = 0.35, E = 0.2;
  const std::vector<double> times = {0.0, 0.6, 1.5, 3.0};
  const double lam = 0.3;
  const auto ra = ReducedState::general(0.3, 0.7, Complex(-0.1, 0.2));
  const auto rb = ReducedState::general(0.55, 0.45, Complex(0.2, -0.15));
  const auto rc = ReducedState::general(
      lam * ra.pp + (1.0 - lam) * rb.pp, lam * ra.mm + (1.0 - lam) * rb.mm,
      lam * ra.pm + (1.0 - lam) * rb.pm);
  const auto ea = rmx::evolve_analytic(dos, s, v, E, ra, times);
  const auto eb = rmx::evolve_analytic(dos, s, v, E, rb, times);
  const auto ec = rmx::evolve_analytic(dos, s, v, E, rc, times);
  for (std::size_t i = 0; i < times.size(); ++i) {
    CHECK(std::abs(ec.rho[i].pp -
                   (lam * ea.rho[i].pp + (1.0 - lam) * eb.rho[i].pp)) < 1e-12);
    CHECK(std::abs(ec.rho[i].mm -
                   (lam * ea.rho[i].mm + (1.0 - lam) * eb.rho[i].mm)) < 1e-12);
    CHECK(std::abs(ec.rho[i].pm -
                   (lam * ea.rho[i].pm + (1.0 - lam) * eb.rho[i].pm)) < 1e-12);
  }
}

TEST_CASE("stationary state columns are normalized and diagnostics gate") {
  const auto dos = DensityOfStates::gaussian_convolution(1, 1.0, 0.0);
  const auto st = rmx::stationary_reduced(dos, 0.3, 0.3, 0.4,
                                          ReducedState::diagonal(1.0, 0.0));
  CHECK(st.rho.pp + st.rho.mm == doctest::Approx(1.0).epsilon(1e-14));
  for (int d = 0; d < 2; ++d)
    CHECK(st.prob.column_sum(d) == doctest::Approx(1.0).epsilon(1e-14));

  // memory of the initial level requires a splitting
  CHECK(rmx::rho0_dependence_diagnostic(dos, 0.0, 0.3) ==
        doctest::Approx(0.0).epsilon(1e-10));
  CHECK(rmx::rho0_dependence_diagnostic(dos, 0.4, 0.3) > 1e-4);
}

}  // namespace
