// numerics.hpp: quadrature, root finding, extrapolation, oscillatory integrals.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace rmx {

using Complex = std::complex<double>;

/// One-pass mean/variance accumulator (Welford). Numerically stable.
class Welford {
 public:
  void add(double x) {
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }
  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  /// Sample variance (n-1 normalization); 0 for fewer than two samples.
  double variance() const {
    return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
  }
  /// Standard error of the mean.
  double stderror() const {
    return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
  }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// Adaptive Simpson quadrature with absolute tolerance.
/// The integrand must be finite on [a, b].
double simpson_adaptive(const std::function<double(double)>& f, double a,
                        double b, double tol, int max_depth = 48);

/// Adaptive Gauss-Kronrod (G7, K15) with absolute tolerance.
double gk_adaptive(const std::function<double(double)>& f, double a, double b,
                   double tol, int max_depth = 48);

/// Complex-valued adaptive Gauss-Kronrod.
Complex gk_adaptive_complex(const std::function<Complex(double)>& f, double a,
                            double b, double tol, int max_depth = 48);

/// Vector-valued adaptive Gauss-Kronrod: integrates `m` components at once on
/// a shared node set (error norm: componentwise max). `f` writes the integrand
/// components for abscissa x into out[0..m-1].
std::vector<double> gk_adaptive_multi(
    const std::function<void(double, double*)>& f, std::size_t m, double a,
    double b, double tol, int max_depth = 48);

/// Bisection for a monotone function: returns x in [lo, hi] with
/// |f(x) - target| <= ftol or the bracket narrowed to xtol.
double bisect(const std::function<double(double)>& f, double lo, double hi,
              double target, double ftol, double xtol, int max_iter = 200);

/// Three-level Richardson extrapolation for values with errors linear and
/// quadratic in the step: f(h) = f0 + c1 h + c2 h^2 + O(h^3).
/// Inputs are samples at h, 2h, 4h.
template <typename T>
T richardson3(T f_h, T f_2h, T f_4h) {
  return (8.0 * f_h - 6.0 * f_2h + f_4h) / 3.0;
}

/// Two-level Richardson: removes the linear term only.
template <typename T>
T richardson2(T f_h, T f_2h) {
  return 2.0 * f_h - f_2h;
}

/// Uniformly sampled section for oscillatory quadrature: values of a smooth
/// function at x_j = a + j h, j = 0..count-1, with count odd (whole panels).
struct UniformSection {
  double a = 0.0;
  double h = 0.0;
  std::vector<double> f;
};

/// Filon-Simpson cosine moment: integral of f(x) cos(t x) over the section.
/// Exact for quadratic f at any t; degenerates to Simpson at t = 0.
double filon_cos(const UniformSection& s, double t);

/// Filon-Simpson sine moment: integral of f(x) sin(t x) over the section.
double filon_sin(const UniformSection& s, double t);

/// Integral of f(x) e^{i t x} over a complex-valued section (separate
/// real/imag value arrays share the grid).
struct UniformSectionC {
  double a = 0.0;
  double h = 0.0;
  std::vector<Complex> f;
};
Complex filon_exp(const UniformSectionC& s, double t);

/// Piecewise cubic Hermite interpolant on sorted nodes with caller-supplied
/// derivatives. T may be double or std::complex<double>.
template <typename T>
class HermiteInterp {
 public:
  HermiteInterp() = default;
  HermiteInterp(std::vector<double> x, std::vector<T> f, std::vector<T> d)
      : x_(std::move(x)), f_(std::move(f)), d_(std::move(d)) {
    if (x_.size() != f_.size() || x_.size() != d_.size() || x_.size() < 2)
      throw std::invalid_argument("HermiteInterp: inconsistent node arrays");
  }

  bool empty() const { return x_.empty(); }
  double lo() const { return x_.front(); }
  double hi() const { return x_.back(); }

  T operator()(double x) const {
    const std::size_t i = segment(x);
    const double dx = x_[i + 1] - x_[i];
    const double t = (x - x_[i]) / dx;
    const double t2 = t * t;
    const double t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1;
    const double h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2;
    const double h11 = t3 - t2;
    return h00 * f_[i] + (h10 * dx) * d_[i] + h01 * f_[i + 1] +
           (h11 * dx) * d_[i + 1];
  }

 private:
  std::size_t segment(double x) const {
    if (x <= x_.front()) return 0;
    if (x >= x_.back()) return x_.size() - 2;
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    return static_cast<std::size_t>(it - x_.begin()) - 1;
  }

  std::vector<double> x_;
  std::vector<T> f_;
  std::vector<T> d_;
};

}  // namespace rmx
