// test_dos.cpp: level-density families, quantiles, transforms, rate function.
// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "rmx/dos.hpp"
#include "rmx/numerics.hpp"

namespace {

using rmx::Complex;
using rmx::DensityOfStates;

constexpr double kPi = 3.14159265358979323846;

TEST_CASE("gaussian convolution family evaluates the normal density") {
  const auto dos = DensityOfStates::gaussian_convolution(4, 0.5, 0.3);
  // mean J e0 = 1.2, variance J a^2 = 1
  CHECK(dos.eval(1.2) == doctest::Approx(1.0 / std::sqrt(2.0 * kPi))
                             .epsilon(1e-14));
  CHECK(dos.eval(2.2) ==
        doctest::Approx(std::exp(-0.5) / std::sqrt(2.0 * kPi)).epsilon(1e-14));
  CHECK(dos.cdf(1.2) == doctest::Approx(0.5).epsilon(1e-14));
  const auto q = dos.quantiles(1);
  REQUIRE(q.size() == 1);
  CHECK(q[0] == doctest::Approx(1.2).epsilon(1e-8));
  CHECK(dos.sharp_points().empty());
  const auto w = dos.mass_window();
  CHECK(w.first < 1.2 - 5.0);
  CHECK(w.second > 1.2 + 5.0);
}

TEST_CASE("quantiles split the mass evenly and stay sorted") {
  const auto dos = DensityOfStates::gaussian_convolution(1, 1.0, 0.0);
  const auto q = dos.quantiles(64);
  REQUIRE(q.size() == 64);
  for (std::size_t j = 0; j < q.size(); ++j) {
    if (j) CHECK(q[j] > q[j - 1]);
    CHECK(dos.cdf(q[j]) ==
          doctest::Approx((j + 0.5) / 64.0).epsilon(1e-10));
  }
}

TEST_CASE("stieltjes transform matches direct quadrature and symmetry") {
  const auto dos = DensityOfStates::gaussian_convolution(2, 0.8, -0.1);
  const Complex z(0.3, 0.7);
  const Complex direct = rmx::gk_adaptive_complex(
      [&](double x) { return Complex(dos.eval(x), 0.0) / (x - z); }, -12.0,
      12.0, 1e-12);
  CHECK(std::abs(dos.stieltjes(z) - direct) < 1e-9);
  CHECK(std::abs(dos.stieltjes(std::conj(z)) - std::conj(dos.stieltjes(z))) <
        1e-13);
  CHECK(dos.stieltjes(z).imag() * z.imag() > 0.0);

  const Complex dz(1e-6, 0.0);
  const Complex fd = (dos.stieltjes(z + dz) - dos.stieltjes(z - dz)) /
                     (2.0 * dz);
  CHECK(std::abs(dos.stieltjes_deriv(z) - fd) < 1e-7);
}

TEST_CASE("lattice family is the arcsine band") {
  const auto dos = DensityOfStates::lattice(1.0);
  const auto w = dos.mass_window();
  CHECK(w.first == doctest::Approx(0.0));
  CHECK(w.second == doctest::Approx(4.0));
  CHECK(dos.eval(-0.5) == 0.0);
  CHECK(dos.eval(4.5) == 0.0);
  CHECK(dos.eval(2.0) == doctest::Approx(1.0 / (2.0 * kPi)).epsilon(1e-14));
  CHECK(dos.cdf(2.0) == doctest::Approx(0.5).epsilon(1e-12));
  const auto sharp = dos.sharp_points();
  REQUIRE(sharp.size() == 2);
  CHECK(sharp[0] == doctest::Approx(0.0));
  CHECK(sharp[1] == doctest::Approx(4.0));

  // closed-form transform -1/sqrt(z (z-4)) on the Herglotz branch
  for (const Complex z : {Complex(2.0, 0.5), Complex(-1.0, 0.25),
                          Complex(5.0, 1.0)}) {
    const Complex want = -1.0 / (std::sqrt(z) * std::sqrt(z - 4.0));
    CHECK(std::abs(dos.stieltjes(z) - want) < 1e-10);
    CHECK(dos.stieltjes(z).imag() > 0.0);
  }
}

TEST_CASE("scaled flat profiles stretch a unit-mass shape") {
  const auto g = DensityOfStates::scaled_flat(rmx::FlatProfile::Gaussian,
                                              1000.0);
  CHECK(g.eval(0.0) ==
        doctest::Approx(1.0 / (1000.0 * std::sqrt(2.0 * kPi))).epsilon(1e-13));
  CHECK(g.sharp_points().empty());

  const auto sc = DensityOfStates::scaled_flat(rmx::FlatProfile::Semicircle,
                                               1.5);
  CHECK(sc.eval(0.0) == doctest::Approx(1.0 / (kPi * 1.5)).epsilon(1e-13));
  CHECK(sc.eval(3.1) == 0.0);
  const auto sharp = sc.sharp_points();
  REQUIRE(sharp.size() == 2);
  CHECK(sharp[0] == doctest::Approx(-3.0));
  CHECK(sharp[1] == doctest::Approx(3.0));
  // unit mass after stretching
  CHECK(rmx::gk_adaptive([&](double x) { return sc.eval(x); }, -3.0, 3.0,
                         1e-10) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("tabulated densities renormalize and interpolate") {
  const std::vector<double> grid = {0.0, 1.0, 2.0};
  const auto dos = DensityOfStates::tabulated(grid, {0.0, 1.0, 0.0});
  CHECK(dos.eval(0.5) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(dos.eval(-0.1) == 0.0);
  CHECK(dos.cdf(1.0) == doctest::Approx(0.5).epsilon(1e-14));

  // same shape with unnormalized values loads to the same density
  const auto scaled = DensityOfStates::tabulated(grid, {0.0, 5.0, 0.0});
  CHECK(scaled.eval(0.5) == doctest::Approx(0.5).epsilon(1e-14));

  // F(x) = x^2/2 on [0,1]: quartile nodes at sqrt(1/2) and 2 - sqrt(1/2)
  const auto q = dos.quantiles(2);
  REQUIRE(q.size() == 2);
  CHECK(q[0] == doctest::Approx(std::sqrt(0.5)).epsilon(1e-9));
  CHECK(q[1] == doctest::Approx(2.0 - std::sqrt(0.5)).epsilon(1e-9));

  CHECK(dos.sharp_points() == grid);
  CHECK_THROWS(DensityOfStates::tabulated({1.0, 0.5}, {1.0, 1.0}));
}

TEST_CASE("rate function of the gaussian family has the closed form") {
  const auto dos = DensityOfStates::gaussian_convolution(1, 1.0, 0.0);
  const auto p = dos.rate_function(16, -1.0);
  // sJ = -(e)^2/2 - log(2 pi J)/2J, beta = -e
  CHECK(p.sJ == doctest::Approx(-0.6440770558952852).epsilon(1e-12));
  CHECK(p.beta == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS(DensityOfStates::lattice(1.0).rate_function(4, 0.5));
}

TEST_CASE("local density ratio approaches the gibbs factor") {
  const int J = 64;
  const auto dos = DensityOfStates::gaussian_convolution(J, 1.0, 0.0);
  const double e = -0.5, eps = 0.3;
  const double beta = dos.rate_function(J, e).beta;
  const double exact =
      std::exp(-e * eps - eps * eps / (2.0 * J));  // gaussian algebra
  CHECK(dos.local_gibbs_ratio(J, e, eps) ==
        doctest::Approx(exact).epsilon(1e-12));
  CHECK(dos.local_gibbs_ratio(J, e, eps) ==
        doctest::Approx(std::exp(beta * eps)).epsilon(1e-3));
}

}  // namespace
