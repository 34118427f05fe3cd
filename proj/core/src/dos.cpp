// dos.cpp: level-density families, quantiles, Stieltjes transforms.
// SPDX-License-Identifier: Apache-2.0
#include "rmx/dos.hpp"

#include <algorithm>
#include <cmath>

#include "rmx/faddeeva.hpp"

namespace rmx {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kTwoPi = 6.283185307179586;

double gauss_pdf(double E, double mu, double sigma) {
  const double u = (E - mu) / sigma;
  return std::exp(-0.5 * u * u) / (sigma * std::sqrt(kTwoPi));
}

double gauss_cdf(double E, double mu, double sigma) {
  return 0.5 * std::erfc(-(E - mu) / (sigma * kSqrt2));
}

Complex gauss_stieltjes(Complex z, double mu, double sigma) {
  if (z.imag() < 0.0) return std::conj(gauss_stieltjes(std::conj(z), mu, sigma));
  const Complex u = (z - mu) / (kSqrt2 * sigma);
  return Complex(0.0, std::sqrt(M_PI / 2.0) / sigma) * faddeeva_w(u);
}

Complex gauss_stieltjes_deriv(Complex z, double mu, double sigma) {
  if (z.imag() < 0.0)
    return std::conj(gauss_stieltjes_deriv(std::conj(z), mu, sigma));
  const Complex u = (z - mu) / (kSqrt2 * sigma);
  const Complex wp =
      -2.0 * u * faddeeva_w(u) + Complex(0.0, 2.0 / std::sqrt(M_PI));
  return Complex(0.0, std::sqrt(M_PI) / (2.0 * sigma * sigma)) * wp;
}

double semicircle_pdf(double x) {  // unit-mass profile on [-2, 2]
  if (x <= -2.0 || x >= 2.0) return 0.0;
  return std::sqrt(4.0 - x * x) / kTwoPi;
}

double semicircle_cdf(double x) {
  if (x <= -2.0) return 0.0;
  if (x >= 2.0) return 1.0;
  return 0.5 + x * std::sqrt(4.0 - x * x) / (2.0 * kTwoPi) +
         std::asin(0.5 * x) / M_PI;
}

Complex semicircle_stieltjes(Complex z) {
  return 0.5 * (-z + std::sqrt(z - 2.0) * std::sqrt(z + 2.0));
}

Complex semicircle_stieltjes_deriv(Complex z) {
  return 0.5 * (-1.0 + z / (std::sqrt(z - 2.0) * std::sqrt(z + 2.0)));
}

}  // namespace

DensityOfStates DensityOfStates::gaussian_convolution(int J, double a,
                                                      double e0) {
  if (J < 1) throw std::invalid_argument("dos: convolution count must be >= 1");
  if (!(a > 0.0)) throw std::invalid_argument("dos: energy scale must be > 0");
  DensityOfStates d;
  d.kind_ = Kind::GaussianConvolution;
  d.J_ = J;
  d.a_ = a;
  d.e0_ = e0;
  return d;
}

DensityOfStates DensityOfStates::lattice(double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("dos: spacing must be > 0");
  DensityOfStates d;
  d.kind_ = Kind::Lattice;
  d.delta_ = delta;
  return d;
}

DensityOfStates DensityOfStates::scaled_flat(FlatProfile profile, double a) {
  if (!(a > 0.0)) throw std::invalid_argument("dos: energy scale must be > 0");
  DensityOfStates d;
  d.kind_ = Kind::ScaledFlat;
  d.profile_ = profile;
  d.a_ = a;
  return d;
}

DensityOfStates DensityOfStates::tabulated(std::vector<double> grid,
                                           std::vector<double> values) {
  if (grid.size() < 2 || grid.size() != values.size())
    throw std::invalid_argument("dos: table needs >= 2 matched rows");
  for (std::size_t i = 0; i + 1 < grid.size(); ++i)
    if (!(grid[i] < grid[i + 1]))
      throw std::invalid_argument("dos: table grid must be strictly increasing");
  for (double v : values)
    if (!(v >= 0.0))
      throw std::invalid_argument("dos: table density must be nonnegative");
  DensityOfStates d;
  d.kind_ = Kind::Tabulated;
  d.grid_ = std::move(grid);
  d.values_ = std::move(values);
  d.cum_.assign(d.grid_.size(), 0.0);
  for (std::size_t i = 1; i < d.grid_.size(); ++i)
    d.cum_[i] = d.cum_[i - 1] + 0.5 * (d.values_[i - 1] + d.values_[i]) *
                                    (d.grid_[i] - d.grid_[i - 1]);
  const double total = d.cum_.back();
  if (!(total > 0.0)) throw std::invalid_argument("dos: table has zero mass");
  for (double& v : d.values_) v /= total;
  for (double& c : d.cum_) c /= total;
  return d;
}

double DensityOfStates::eval(double E) const {
  switch (kind_) {
    case Kind::GaussianConvolution:
      return gauss_pdf(E, J_ * e0_, a_ * std::sqrt(double(J_)));
    case Kind::Lattice: {
      const double L = 4.0 / (delta_ * delta_);
      if (E <= 0.0 || E >= L) return 0.0;
      return 1.0 / (M_PI * std::sqrt(E * (L - E)));
    }
    case Kind::ScaledFlat:
      if (profile_ == FlatProfile::Gaussian) return gauss_pdf(E, 0.0, a_);
      return semicircle_pdf(E / a_) / a_;
    case Kind::Tabulated: {
      if (E <= grid_.front() || E >= grid_.back()) {
        if (E == grid_.front() || E == grid_.back()) {
          const std::size_t i = (E == grid_.front()) ? 0 : grid_.size() - 1;
          return values_[i];
        }
        return 0.0;
      }
      const auto it = std::upper_bound(grid_.begin(), grid_.end(), E);
      const std::size_t i = static_cast<std::size_t>(it - grid_.begin()) - 1;
      const double t = (E - grid_[i]) / (grid_[i + 1] - grid_[i]);
      return values_[i] + t * (values_[i + 1] - values_[i]);
    }
  }
  return 0.0;
}

double DensityOfStates::cdf(double E) const {
  switch (kind_) {
    case Kind::GaussianConvolution:
      return gauss_cdf(E, J_ * e0_, a_ * std::sqrt(double(J_)));
    case Kind::Lattice: {
      const double L = 4.0 / (delta_ * delta_);
      if (E <= 0.0) return 0.0;
      if (E >= L) return 1.0;
      return (2.0 / M_PI) * std::asin(std::sqrt(E / L));
    }
    case Kind::ScaledFlat:
      if (profile_ == FlatProfile::Gaussian) return gauss_cdf(E, 0.0, a_);
      return semicircle_cdf(E / a_);
    case Kind::Tabulated: {
      if (E <= grid_.front()) return 0.0;
      if (E >= grid_.back()) return 1.0;
      const auto it = std::upper_bound(grid_.begin(), grid_.end(), E);
      const std::size_t i = static_cast<std::size_t>(it - grid_.begin()) - 1;
      const double x = E - grid_[i];
      const double nu = eval(E);
      return cum_[i] + 0.5 * x * (values_[i] + nu);
    }
  }
  return 0.0;
}

std::vector<double> DensityOfStates::quantiles(std::size_t n) const {
  if (n < 1) throw std::invalid_argument("dos: quantile count must be >= 1");
  std::vector<double> out(n);
  if (kind_ == Kind::Lattice) {
    const double L = 4.0 / (delta_ * delta_);
    for (std::size_t j = 0; j < n; ++j) {
      const double p = (static_cast<double>(j) + 0.5) / static_cast<double>(n);
      const double sn = std::sin(0.5 * M_PI * p);
      out[j] = L * sn * sn;
    }
    return out;
  }
  if (kind_ == Kind::Tabulated) {
    for (std::size_t j = 0; j < n; ++j) {
      const double p = (static_cast<double>(j) + 0.5) / static_cast<double>(n);
      const auto it = std::upper_bound(cum_.begin(), cum_.end(), p);
      std::size_t i = static_cast<std::size_t>(it - cum_.begin());
      i = (i == 0) ? 0 : i - 1;
      i = std::min(i, grid_.size() - 2);
      const double dp = p - cum_[i];
      const double h = grid_[i + 1] - grid_[i];
      const double k = (values_[i + 1] - values_[i]) / h;
      const double v = values_[i];
      double x;
      if (dp <= 0.0) {
        x = 0.0;
      } else if (std::abs(k) * h < 1e-14 * (std::abs(v) + 1e-300)) {
        x = dp / v;
      } else {
        x = (-v + std::sqrt(std::max(0.0, v * v + 2.0 * k * dp))) / k;
      }
      out[j] = grid_[i] + std::clamp(x, 0.0, h);
    }
    return out;
  }
  const auto [lo, hi] = mass_window();
  const double xtol = 1e-12 * std::max(1.0, hi - lo);
  for (std::size_t j = 0; j < n; ++j) {
    const double p = (static_cast<double>(j) + 0.5) / static_cast<double>(n);
    out[j] = bisect([this](double E) { return cdf(E); }, lo, hi, p, 0.0, xtol,
                    200);
  }
  return out;
}

Complex DensityOfStates::stieltjes(Complex z) const {
  switch (kind_) {
    case Kind::GaussianConvolution:
      return gauss_stieltjes(z, J_ * e0_, a_ * std::sqrt(double(J_)));
    case Kind::Lattice: {
      const double L = 4.0 / (delta_ * delta_);
      return -1.0 / (std::sqrt(z) * std::sqrt(z - L));
    }
    case Kind::ScaledFlat:
      if (profile_ == FlatProfile::Gaussian) return gauss_stieltjes(z, 0.0, a_);
      return semicircle_stieltjes(z / a_) / a_;
    case Kind::Tabulated: {
      Complex acc(0.0, 0.0);
      for (std::size_t i = 0; i + 1 < grid_.size(); ++i) {
        const double h = grid_[i + 1] - grid_[i];
        const double alpha = (values_[i + 1] - values_[i]) / h;
        const double beta = values_[i] - alpha * grid_[i];
        const Complex l2 = std::log(grid_[i + 1] - z);
        const Complex l1 = std::log(grid_[i] - z);
        acc += alpha * h + (alpha * z + beta) * (l2 - l1);
      }
      return acc;
    }
  }
  return Complex(0.0, 0.0);
}

Complex DensityOfStates::stieltjes_deriv(Complex z) const {
  switch (kind_) {
    case Kind::GaussianConvolution:
      return gauss_stieltjes_deriv(z, J_ * e0_, a_ * std::sqrt(double(J_)));
    case Kind::Lattice: {
      const double L = 4.0 / (delta_ * delta_);
      const Complex m = -1.0 / (std::sqrt(z) * std::sqrt(z - L));
      return -0.5 * (2.0 * z - L) * m * m * m;
    }
    case Kind::ScaledFlat:
      if (profile_ == FlatProfile::Gaussian)
        return gauss_stieltjes_deriv(z, 0.0, a_);
      return semicircle_stieltjes_deriv(z / a_) / (a_ * a_);
    case Kind::Tabulated: {
      Complex acc(0.0, 0.0);
      for (std::size_t i = 0; i + 1 < grid_.size(); ++i) {
        const double h = grid_[i + 1] - grid_[i];
        const double alpha = (values_[i + 1] - values_[i]) / h;
        const double beta = values_[i] - alpha * grid_[i];
        const Complex l2 = std::log(grid_[i + 1] - z);
        const Complex l1 = std::log(grid_[i] - z);
        acc += alpha * (l2 - l1) -
               (alpha * z + beta) *
                   (1.0 / (grid_[i + 1] - z) - 1.0 / (grid_[i] - z));
      }
      return acc;
    }
  }
  return Complex(0.0, 0.0);
}

std::pair<double, double> DensityOfStates::mass_window() const {
  switch (kind_) {
    case Kind::GaussianConvolution: {
      const double mu = J_ * e0_;
      const double sigma = a_ * std::sqrt(double(J_));
      return {mu - 13.5 * sigma, mu + 13.5 * sigma};
    }
    case Kind::Lattice:
      return {0.0, 4.0 / (delta_ * delta_)};
    case Kind::ScaledFlat:
      if (profile_ == FlatProfile::Gaussian) return {-13.5 * a_, 13.5 * a_};
      return {-2.0 * a_, 2.0 * a_};
    case Kind::Tabulated:
      return {grid_.front(), grid_.back()};
  }
  return {0.0, 0.0};
}

std::vector<double> DensityOfStates::sharp_points() const {
  switch (kind_) {
    case Kind::GaussianConvolution:
      return {};
    case Kind::Lattice:
      return {0.0, 4.0 / (delta_ * delta_)};
    case Kind::ScaledFlat:
      if (profile_ == FlatProfile::Gaussian) return {};
      return {-2.0 * a_, 2.0 * a_};
    case Kind::Tabulated:
      return grid_;
  }
  return {};
}

ThermoPoint DensityOfStates::rate_function(int J, double e) const {
  if (J < 1) throw std::invalid_argument("rate_function: count must be >= 1");
  ThermoPoint tp;
  tp.e = e;
  if (kind_ == Kind::GaussianConvolution) {
    const double de = e - e0_;
    tp.sJ = -de * de / (2.0 * a_ * a_) -
            std::log(kTwoPi * J * a_ * a_) / (2.0 * J);
    tp.beta = (e0_ - e) / (a_ * a_);
    return tp;
  }
  if (kind_ == Kind::Tabulated) {
    const double E = J * e;
    const double nu = eval(E);
    if (!(nu > 0.0))
      throw std::domain_error("rate_function: energy outside table support");
    double hmin = grid_.back() - grid_.front();
    for (std::size_t i = 0; i + 1 < grid_.size(); ++i)
      hmin = std::min(hmin, grid_[i + 1] - grid_[i]);
    const double h = 1e-3 * hmin;
    const double np = eval(E + h);
    const double nm = eval(E - h);
    if (!(np > 0.0) || !(nm > 0.0))
      throw std::domain_error("rate_function: stencil leaves table support");
    tp.sJ = std::log(nu) / J;
    tp.beta = (std::log(np) - std::log(nm)) / (2.0 * h);
    return tp;
  }
  throw std::invalid_argument("rate_function: family has no rate-function form");
}

double DensityOfStates::local_gibbs_ratio(int J, double e, double eps) const {
  const double den = eval(J * e);
  if (!(den > 0.0))
    throw std::domain_error("local_gibbs_ratio: zero density at base energy");
  return eval(J * e + eps) / den;
}

}  // namespace rmx
