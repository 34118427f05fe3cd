// test_numerics.cpp: quadrature, extrapolation, oscillatory moments, the
// scaled complex error function, and interpolation.
// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "rmx/faddeeva.hpp"
#include "rmx/numerics.hpp"

namespace {

using rmx::Complex;

constexpr double kPi = 3.14159265358979323846;

TEST_CASE("welford matches direct mean and sample variance") {
  const std::vector<double> xs = {1.5, -0.25, 3.0, 0.75, 2.5};
  rmx::Welford w;
  for (double x : xs) w.add(x);
  CHECK(w.count() == 5);
  CHECK(w.mean() == doctest::Approx(1.5).epsilon(1e-15));
  // sum of squared deviations: 6.875, variance 6.875/4
  CHECK(w.variance() == doctest::Approx(6.875 / 4.0).epsilon(1e-14));
  CHECK(w.stderror() ==
        doctest::Approx(std::sqrt(6.875 / 4.0 / 5.0)).epsilon(1e-14));
}

TEST_CASE("adaptive quadratures reproduce closed-form integrals") {
  const auto sq = [](double x) { return x * x; };
  CHECK(rmx::simpson_adaptive(sq, 0.0, 1.0, 1e-12) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(rmx::gk_adaptive([](double x) { return std::sin(x); }, 0.0, kPi,
                         1e-12) == doctest::Approx(2.0).epsilon(1e-12));

  const Complex e1 = rmx::gk_adaptive_complex(
      [](double x) { return std::exp(Complex(0.0, x)); }, 0.0, 1.0, 1e-12);
  CHECK(std::abs(e1 - Complex(std::sin(1.0), 1.0 - std::cos(1.0))) < 1e-12);

  const auto multi = rmx::gk_adaptive_multi(
      [](double x, double* out) {
        out[0] = x * x;
        out[1] = std::exp(-x);
      },
      2, 0.0, 2.0, 1e-12);
  CHECK(multi[0] == doctest::Approx(8.0 / 3.0).epsilon(1e-12));
  CHECK(multi[1] == doctest::Approx(1.0 - std::exp(-2.0)).epsilon(1e-12));
}

TEST_CASE("bisect finds the monotone root") {
  const double r = rmx::bisect([](double x) { return x * x; }, 0.0, 2.0, 2.0,
                               1e-14, 1e-14);
  CHECK(r == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("richardson extrapolation removes the modeled error terms") {
  const auto f = [](double h) { return 3.0 + 2.0 * h - 5.0 * h * h; };
  CHECK(rmx::richardson3(f(0.1), f(0.2), f(0.4)) ==
        doctest::Approx(3.0).epsilon(1e-13));
  const auto g = [](double h) { return 1.0 - 4.0 * h; };
  CHECK(rmx::richardson2(g(0.05), g(0.1)) ==
        doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("filon moments are exact for quadratic integrands") {
  // f(x) = x^2 - x + 2 on [0.3, 1.9], t = 2.7; fixed-precision references.
  rmx::UniformSection s;
  s.a = 0.3;
  s.h = 0.2;
  for (int j = 0; j <= 8; ++j) {
    const double x = s.a + s.h * j;
    s.f.push_back(x * x - x + 2.0);
  }
  CHECK(rmx::filon_cos(s, 2.7) ==
        doctest::Approx(-1.3760788953710538529).epsilon(1e-13));
  CHECK(rmx::filon_sin(s, 2.7) ==
        doctest::Approx(-0.44036957589020012913).epsilon(1e-13));
}

TEST_CASE("filon moments degenerate to simpson at t = 0") {
  rmx::UniformSection s;
  s.a = -1.0;
  s.h = 0.25;
  for (int j = 0; j <= 8; ++j) {
    const double x = s.a + s.h * j;
    s.f.push_back(std::exp(-x * x));
  }
  double simpson = 0.0;
  for (int j = 0; j + 2 <= 8; j += 2)
    simpson += s.h / 3.0 * (s.f[j] + 4.0 * s.f[j + 1] + s.f[j + 2]);
  CHECK(rmx::filon_cos(s, 0.0) == doctest::Approx(simpson).epsilon(1e-14));
  CHECK(rmx::filon_sin(s, 0.0) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("filon tracks adaptive quadrature for smooth oscillatory data") {
  rmx::UniformSection s;
  s.a = 0.0;
  s.h = 0.005;
  const int count = 801;
  for (int j = 0; j < count; ++j) {
    const double x = s.a + s.h * j;
    s.f.push_back(1.0 / (1.0 + x));
  }
  const double hi = s.a + s.h * (count - 1);
  for (const double t : {1.0, 7.5, 40.0}) {
    const double ref = rmx::gk_adaptive(
        [t](double x) { return std::cos(t * x) / (1.0 + x); }, 0.0, hi, 1e-13);
    // interpolation error is O(h^4): absolute bound, values can be small
    CHECK(std::abs(rmx::filon_cos(s, t) - ref) < 5e-9);
  }
}

TEST_CASE("filon_exp equals cos + i sin moments") {
  rmx::UniformSectionC s;
  s.a = -0.5;
  s.h = 0.1;
  rmx::UniformSection re, im;
  re.a = im.a = s.a;
  re.h = im.h = s.h;
  for (int j = 0; j <= 10; ++j) {
    const double x = s.a + s.h * j;
    const Complex f(std::cos(x), 0.5 * x);
    s.f.push_back(f);
    re.f.push_back(f.real());
    im.f.push_back(f.imag());
  }
  const double t = 3.3;
  const Complex got = rmx::filon_exp(s, t);
  // f e^{itx} = (re + i im)(cos + i sin)
  const Complex want(rmx::filon_cos(re, t) - rmx::filon_sin(im, t),
                     rmx::filon_sin(re, t) + rmx::filon_cos(im, t));
  CHECK(std::abs(got - want) < 1e-14);
}

TEST_CASE("faddeeva function matches fixed references") {
  CHECK(std::abs(rmx::faddeeva_w(Complex(0.0, 0.0)) - Complex(1.0, 0.0)) <
        1e-14);
  CHECK(std::abs(rmx::faddeeva_w(Complex(0.0, 1.0)) -
                 Complex(0.42758357615580699918, 0.0)) < 1e-13);
  CHECK(std::abs(rmx::faddeeva_w(Complex(2.0, 1.0)) -
                 Complex(0.14023958136627798221, 0.22221344017989924646)) <
        1e-13);
  CHECK(std::abs(rmx::faddeeva_w(Complex(-3.0, 0.5)) -
                 Complex(0.037126366054692383489, -0.19298375530036243619)) <
        1e-13);
  // real axis: Re w(x) = exp(-x^2)
  CHECK(rmx::faddeeva_w(Complex(0.4, 0.0)).real() ==
        doctest::Approx(std::exp(-0.16)).epsilon(1e-13));
  // lower half plane via the reflection formula
  CHECK(std::abs(rmx::faddeeva_w(Complex(5.0, -2.0)) -
                 Complex(-0.04064367571463328721, 0.097987312541065157978)) <
        1e-12);
  // symmetry w(-conj z) = conj w(z)
  const Complex z(1.3, 0.7);
  CHECK(std::abs(rmx::faddeeva_w(-std::conj(z)) -
                 std::conj(rmx::faddeeva_w(z))) < 1e-14);
}

TEST_CASE("hermite interpolation reproduces cubics exactly") {
  const auto f = [](double x) { return x * x * x - 2.0 * x * x + x; };
  const auto d = [](double x) { return 3.0 * x * x - 4.0 * x + 1.0; };
  std::vector<double> xs = {0.0, 0.7, 1.3, 2.0};
  std::vector<double> fs, ds;
  for (double x : xs) {
    fs.push_back(f(x));
    ds.push_back(d(x));
  }
  const rmx::HermiteInterp<double> interp(xs, fs, ds);
  for (const double x : {0.11, 0.95, 1.47, 1.9}) {
    CHECK(interp(x) == doctest::Approx(f(x)).epsilon(1e-14));
  }
  CHECK_THROWS_AS(rmx::HermiteInterp<double>({0.0}, {1.0}, {0.0}),
                  std::invalid_argument);
}

}  // namespace
