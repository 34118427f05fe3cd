// numerics.cpp: quadrature, root finding, oscillatory integrals.
// SPDX-License-Identifier: Apache-2.0
#include "rmx/numerics.hpp"

#include <array>
#include <cassert>

namespace rmx {

namespace {

// Kronrod 15 abscissae/weights and embedded Gauss 7 weights on [-1, 1].
constexpr std::array<double, 8> kXgk = {
    0.9914553711208126, 0.9491079123427585, 0.8648644233597691,
    0.7415311855993944, 0.5860872354676911, 0.4058451513773972,
    0.2077849550078985, 0.0};
constexpr std::array<double, 8> kWgk = {
    0.0229353220105292, 0.0630920926299785, 0.1047900103222502,
    0.1406532597155259, 0.1690047266392679, 0.1903505780647854,
    0.2044329400752989, 0.2094821410847278};
constexpr std::array<double, 4> kWg = {0.1294849661688697, 0.2797053914892767,
                                       0.3818300505051189, 0.4179591836734694};

struct GkEstimate {
  double integral;
  double error;
};

GkEstimate gk15(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double hl = 0.5 * (b - a);
  const double fc = f(c);
  double resk = kWgk[7] * fc;
  double resg = kWg[3] * fc;
  for (int j = 0; j < 7; ++j) {
    const double x = hl * kXgk[j];
    const double f1 = f(c - x);
    const double f2 = f(c + x);
    resk += kWgk[j] * (f1 + f2);
    if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
  }
  return {resk * hl, std::abs(resk - resg) * hl};
}

double gk_adaptive_impl(const std::function<double(double)>& f, double a,
                        double b, double tol, int depth) {
  const GkEstimate e = gk15(f, a, b);
  if (e.error <= tol || depth <= 0) return e.integral;
  const double c = 0.5 * (a + b);
  return gk_adaptive_impl(f, a, c, 0.5 * tol, depth - 1) +
         gk_adaptive_impl(f, c, b, 0.5 * tol, depth - 1);
}

struct GkEstimateC {
  Complex integral;
  double error;
};

GkEstimateC gk15c(const std::function<Complex(double)>& f, double a,
                  double b) {
  const double c = 0.5 * (a + b);
  const double hl = 0.5 * (b - a);
  const Complex fc = f(c);
  Complex resk = kWgk[7] * fc;
  Complex resg = kWg[3] * fc;
  for (int j = 0; j < 7; ++j) {
    const double x = hl * kXgk[j];
    const Complex f1 = f(c - x);
    const Complex f2 = f(c + x);
    resk += kWgk[j] * (f1 + f2);
    if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
  }
  return {resk * hl, std::abs(resk - resg) * hl};
}

Complex gk_adaptive_complex_impl(const std::function<Complex(double)>& f,
                                 double a, double b, double tol, int depth) {
  const GkEstimateC e = gk15c(f, a, b);
  if (e.error <= tol || depth <= 0) return e.integral;
  const double c = 0.5 * (a + b);
  return gk_adaptive_complex_impl(f, a, c, 0.5 * tol, depth - 1) +
         gk_adaptive_complex_impl(f, c, b, 0.5 * tol, depth - 1);
}

void gk15_multi(const std::function<void(double, double*)>& f, std::size_t m,
                double a, double b, double* resk_out, double* err_out) {
  const double c = 0.5 * (a + b);
  const double hl = 0.5 * (b - a);
  std::vector<double> buf(m), resk(m, 0.0), resg(m, 0.0);
  f(c, buf.data());
  for (std::size_t i = 0; i < m; ++i) {
    resk[i] = kWgk[7] * buf[i];
    resg[i] = kWg[3] * buf[i];
  }
  std::vector<double> b1(m), b2(m);
  for (int j = 0; j < 7; ++j) {
    const double x = hl * kXgk[j];
    f(c - x, b1.data());
    f(c + x, b2.data());
    for (std::size_t i = 0; i < m; ++i) {
      const double sum = b1[i] + b2[i];
      resk[i] += kWgk[j] * sum;
      if (j % 2 == 1) resg[i] += kWg[j / 2] * sum;
    }
  }
  double err = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    resk_out[i] = resk[i] * hl;
    err = std::max(err, std::abs(resk[i] - resg[i]) * hl);
  }
  *err_out = err;
}

void gk_adaptive_multi_impl(const std::function<void(double, double*)>& f,
                            std::size_t m, double a, double b, double tol,
                            int depth, double* acc) {
  std::vector<double> part(m);
  double err = 0.0;
  gk15_multi(f, m, a, b, part.data(), &err);
  if (err <= tol || depth <= 0) {
    for (std::size_t i = 0; i < m; ++i) acc[i] += part[i];
    return;
  }
  const double c = 0.5 * (a + b);
  gk_adaptive_multi_impl(f, m, a, c, 0.5 * tol, depth - 1, acc);
  gk_adaptive_multi_impl(f, m, c, b, 0.5 * tol, depth - 1, acc);
}

double simpson_rec(const std::function<double(double)>& f, double a, double b,
                   double fa, double fm, double fb, double whole, double tol,
                   int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

// Filon-Simpson weights; theta = t * h. Series below 0.1 avoids cancellation.
struct FilonWeights {
  double alpha, beta, gamma;
};

FilonWeights filon_weights(double theta) {
  const double th = std::abs(theta);
  if (th < 0.1) {
    const double t2 = theta * theta;
    const double t3 = t2 * theta;
    const double t5 = t3 * t2;
    const double t7 = t5 * t2;
    const double alpha = 2.0 * t3 / 45.0 - 2.0 * t5 / 315.0 + 2.0 * t7 / 4725.0;
    const double beta =
        2.0 / 3.0 + 2.0 * t2 / 15.0 - 4.0 * t2 * t2 / 105.0 + 2.0 * t2 * t2 * t2 / 567.0;
    const double gamma =
        4.0 / 3.0 - 2.0 * t2 / 15.0 + t2 * t2 / 210.0 - t2 * t2 * t2 / 11340.0;
    return {alpha, beta, gamma};
  }
  const double s = std::sin(theta);
  const double c = std::cos(theta);
  const double t3 = theta * theta * theta;
  const double alpha = (theta * theta + theta * s * c - 2.0 * s * s) / t3;
  const double beta = 2.0 * (theta * (1.0 + c * c) - 2.0 * s * c) / t3;
  const double gamma = 4.0 * (s - theta * c) / t3;
  return {alpha, beta, gamma};
}

}  // namespace

double simpson_adaptive(const std::function<double(double)>& f, double a,
                        double b, double tol, int max_depth) {
  if (a == b) return 0.0;
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

double gk_adaptive(const std::function<double(double)>& f, double a, double b,
                   double tol, int max_depth) {
  if (a == b) return 0.0;
  return gk_adaptive_impl(f, a, b, tol, max_depth);
}

Complex gk_adaptive_complex(const std::function<Complex(double)>& f, double a,
                            double b, double tol, int max_depth) {
  if (a == b) return Complex(0.0, 0.0);
  return gk_adaptive_complex_impl(f, a, b, tol, max_depth);
}

std::vector<double> gk_adaptive_multi(
    const std::function<void(double, double*)>& f, std::size_t m, double a,
    double b, double tol, int max_depth) {
  std::vector<double> acc(m, 0.0);
  if (a != b) gk_adaptive_multi_impl(f, m, a, b, tol, max_depth, acc.data());
  return acc;
}

double bisect(const std::function<double(double)>& f, double lo, double hi,
              double target, double ftol, double xtol, int max_iter) {
  double flo = f(lo) - target;
  double fhi = f(hi) - target;
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if (flo * fhi > 0.0)
    throw std::invalid_argument("bisect: target not bracketed");
  for (int i = 0; i < max_iter; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid) - target;
    if (std::abs(fm) <= ftol || (hi - lo) <= xtol) return mid;
    if ((fm > 0.0) == (fhi > 0.0)) {
      hi = mid;
      fhi = fm;
    } else {
      lo = mid;
      flo = fm;
    }
  }
  return 0.5 * (lo + hi);
}

double filon_cos(const UniformSection& s, double t) {
  const std::size_t n = s.f.size();
  if (n < 3 || n % 2 == 0)
    throw std::invalid_argument("filon_cos: need an odd node count >= 3");
  const FilonWeights w = filon_weights(t * s.h);
  const double x0 = s.a;
  const double xN = s.a + s.h * static_cast<double>(n - 1);
  double ce = 0.0, co = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double x = s.a + s.h * static_cast<double>(j);
    const double v = s.f[j] * std::cos(t * x);
    if (j % 2 == 0)
      ce += v;
    else
      co += v;
  }
  ce -= 0.5 * (s.f[0] * std::cos(t * x0) + s.f[n - 1] * std::cos(t * xN));
  const double endpoint =
      s.f[n - 1] * std::sin(t * xN) - s.f[0] * std::sin(t * x0);
  return s.h * (w.alpha * endpoint + w.beta * ce + w.gamma * co);
}

double filon_sin(const UniformSection& s, double t) {
  const std::size_t n = s.f.size();
  if (n < 3 || n % 2 == 0)
    throw std::invalid_argument("filon_sin: need an odd node count >= 3");
  const FilonWeights w = filon_weights(t * s.h);
  const double x0 = s.a;
  const double xN = s.a + s.h * static_cast<double>(n - 1);
  double se = 0.0, so = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double x = s.a + s.h * static_cast<double>(j);
    const double v = s.f[j] * std::sin(t * x);
    if (j % 2 == 0)
      se += v;
    else
      so += v;
  }
  se -= 0.5 * (s.f[0] * std::sin(t * x0) + s.f[n - 1] * std::sin(t * xN));
  const double endpoint =
      s.f[0] * std::cos(t * x0) - s.f[n - 1] * std::cos(t * xN);
  return s.h * (w.alpha * endpoint + w.beta * se + w.gamma * so);
}

Complex filon_exp(const UniformSectionC& s, double t) {
  const std::size_t n = s.f.size();
  if (n < 3 || n % 2 == 0)
    throw std::invalid_argument("filon_exp: need an odd node count >= 3");
  UniformSection re{s.a, s.h, {}};
  UniformSection im{s.a, s.h, {}};
  re.f.resize(n);
  im.f.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    re.f[j] = s.f[j].real();
    im.f[j] = s.f[j].imag();
  }
  const double rr = filon_cos(re, t) - filon_sin(im, t);
  const double ii = filon_sin(re, t) + filon_cos(im, t);
  return Complex(rr, ii);
}

}  // namespace rmx
