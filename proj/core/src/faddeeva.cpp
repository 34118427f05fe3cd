// faddeeva.cpp: Weideman rational expansion plus asymptotic continued fraction.
// SPDX-License-Identifier: Apache-2.0
#include "rmx/faddeeva.hpp"

#include <array>
#include <cmath>

namespace rmx {

namespace {

constexpr int kN = 48;          // expansion order
constexpr int kM2 = 4 * kN;     // sampling points for the coefficient DFT
const double kL = std::sqrt(kN / std::sqrt(2.0));
constexpr double kInvSqrtPi = 0.5641895835477563;

// Coefficients of the degree-(N-1) polynomial in (L+iz)/(L-iz), highest first.
std::array<double, kN> weideman_coefficients() {
  const int m = kM2 / 2;  // 96
  std::array<double, kM2> f{};
  f[0] = 0.0;
  for (int k = -m + 1; k <= m - 1; ++k) {
    const double theta = k * M_PI / m;
    const double t = kL * std::tan(0.5 * theta);
    f[k + m] = std::exp(-t * t) * (kL * kL + t * t);
  }
  // Half-swap then real DFT; only the first N+1 outputs are needed.
  std::array<double, kM2> g{};
  for (int j = 0; j < kM2; ++j) g[j] = f[(j + m) % kM2];
  std::array<double, kN> coeff{};
  for (int k = 1; k <= kN; ++k) {
    double acc = 0.0;
    for (int j = 0; j < kM2; ++j)
      acc += g[j] * std::cos(2.0 * M_PI * j * k / kM2);
    coeff[kN - k] = acc / kM2;
  }
  return coeff;
}

Complex weideman_upper(Complex z) {
  static const std::array<double, kN> a = weideman_coefficients();
  const Complex iz(-z.imag(), z.real());
  const Complex den = kL - iz;
  const Complex zz = (kL + iz) / den;
  Complex p(0.0, 0.0);
  for (int i = 0; i < kN; ++i) p = p * zz + a[i];
  return 2.0 * p / (den * den) + kInvSqrtPi / den;
}

Complex continued_fraction_upper(Complex z) {
  Complex r(0.0, 0.0);
  for (int k = 24; k >= 1; --k) r = (0.5 * k) / (z - r);
  return Complex(0.0, kInvSqrtPi) / (z - r);
}

Complex w_upper(Complex z) {
  if (std::norm(z) >= 64.0) return continued_fraction_upper(z);
  return weideman_upper(z);
}

}  // namespace

Complex faddeeva_w(Complex z) {
  if (z.imag() >= 0.0) return w_upper(z);
  // w(z) = 2 exp(-z^2) - conj(w(conj z)); growth below the axis is genuine.
  const Complex wc = w_upper(std::conj(z));
  return 2.0 * std::exp(-z * z) - std::conj(wc);
}

}  // namespace rmx
