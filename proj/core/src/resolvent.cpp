// resolvent.cpp: fixed-point solvers and boundary-value extraction.
// SPDX-License-Identifier: Apache-2.0
#include "rmx/resolvent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rmx/numerics.hpp"

namespace rmx {

namespace {

// One application of the coupled map G(r)_a = m(z - s*a + v^2 r_{-a}).
void apply_map(const DensityOfStates& dos, double s, double v, Complex z,
               const Complex r[2], Complex out[2]) {
  const double v2 = v * v;
  out[0] = dos.stieltjes(z - s + v2 * r[1]);
  out[1] = dos.stieltjes(z + s + v2 * r[0]);
}

double residual_of(const Complex r[2], const Complex g[2]) {
  return std::max(std::abs(g[0] - r[0]), std::abs(g[1] - r[1]));
}

}  // namespace

ResolventPair solve_pair(const DensityOfStates& dos, double s, double v,
                         Complex z, double tol, const ResolventPair* warm,
                         double theta0, int max_iter) {
  Complex r[2];
  if (warm) {
    r[0] = warm->rp;
    r[1] = warm->rm;
  } else {
    r[0] = dos.stieltjes(z - s);
    r[1] = dos.stieltjes(z + s);
  }
  Complex g[2];
  apply_map(dos, s, v, z, r, g);
  double res = residual_of(r, g);
  double theta = theta0;
  int it = 0;
  while (res > tol && it < max_iter) {
    Complex rn[2] = {(1.0 - theta) * r[0] + theta * g[0],
                     (1.0 - theta) * r[1] + theta * g[1]};
    Complex gn[2];
    apply_map(dos, s, v, z, rn, gn);
    const double resn = residual_of(rn, gn);
    if (resn > res && theta > 1.0 / 64.0) {
      theta *= 0.5;  // retry the same step with stronger damping
      continue;
    }
    r[0] = rn[0];
    r[1] = rn[1];
    g[0] = gn[0];
    g[1] = gn[1];
    res = resn;
    ++it;
  }
  if (res > tol)
    throw SolverError("one-point solve did not converge", res);
  ResolventPair out;
  out.rp = g[0];
  out.rm = g[1];
  out.iterations = it;
  out.residual = res;
  if (z.imag() != 0.0) {
    const double sz = z.imag() > 0.0 ? 1.0 : -1.0;
    if (!(out.rp.imag() * sz > 0.0) || !(out.rm.imag() * sz > 0.0))
      throw SolverError("solution violates the half-plane sign condition",
                        res);
  }
  return out;
}

std::pair<Complex, Complex> pair_derivs(const DensityOfStates& dos, double s,
                                        double v, Complex z,
                                        const ResolventPair& pair) {
  const double v2 = v * v;
  const Complex m2p = dos.stieltjes_deriv(z - s + v2 * pair.rm);
  const Complex m2m = dos.stieltjes_deriv(z + s + v2 * pair.rp);
  const Complex det = 1.0 - v2 * v2 * m2p * m2m;
  const Complex rpd = m2p * (1.0 + v2 * m2m) / det;
  const Complex rmd = m2m * (1.0 + v2 * m2p) / det;
  return {rpd, rmd};
}

ResolventField solve_one_point(const DensityOfStates& dos, double s, double v,
                               const std::vector<Complex>& grid, double tol) {
  ResolventField f;
  f.s = s;
  f.v = v;
  f.grid = grid;
  f.rp.reserve(grid.size());
  f.rm.reserve(grid.size());
  ResolventPair warm;
  bool have_warm = false;
  for (const Complex& z : grid) {
    const ResolventPair p =
        solve_pair(dos, s, v, z, tol, have_warm ? &warm : nullptr);
    f.rp.push_back(p.rp);
    f.rm.push_back(p.rm);
    warm = p;
    have_warm = true;
  }
  return f;
}

double BoundaryResolvent::nu(int idx) const {
  return std::max(0.0, r(idx).imag()) / M_PI;
}

BoundaryResolvent boundary_resolvent(const DensityOfStates& dos, double s,
                                     double v, double lambda, double h,
                                     double tol) {
  ResolventPair p4 = solve_pair(dos, s, v, Complex(lambda, 4.0 * h), tol);
  ResolventPair p2 =
      solve_pair(dos, s, v, Complex(lambda, 2.0 * h), tol, &p4);
  ResolventPair p1 = solve_pair(dos, s, v, Complex(lambda, h), tol, &p2);
  BoundaryResolvent b;
  b.lambda = lambda;
  b.rp = richardson3(p1.rp, p2.rp, p4.rp);
  b.rm = richardson3(p1.rm, p2.rm, p4.rm);
  const Complex r2p = richardson2(p1.rp, p2.rp);
  const Complex r2m = richardson2(p1.rm, p2.rm);
  b.singular =
      std::abs(b.rp - r2p) > 1e-4 || std::abs(b.rm - r2m) > 1e-4;
  return b;
}

double SpectralDensities::window_average(int idx, double lam,
                                         double eps) const {
  const std::vector<double>& nu = idx == 0 ? nu_p : nu_m;
  const double lo = lam - eps;
  const double hi = lam + eps;
  if (lambda.size() < 2 || lo < lambda.front() || hi > lambda.back())
    throw std::invalid_argument("window average outside the solved grid");
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < lambda.size(); ++i) {
    const double a = std::max(lo, lambda[i]);
    const double b = std::min(hi, lambda[i + 1]);
    if (a >= b) continue;
    const double hseg = lambda[i + 1] - lambda[i];
    const double ta = (a - lambda[i]) / hseg;
    const double tb = (b - lambda[i]) / hseg;
    const double fa = nu[i] + ta * (nu[i + 1] - nu[i]);
    const double fb = nu[i] + tb * (nu[i + 1] - nu[i]);
    acc += 0.5 * (fa + fb) * (b - a);
  }
  return acc / (2.0 * eps);
}

SpectralDensities spectral_density(const DensityOfStates& dos, double s,
                                   double v,
                                   const std::vector<double>& lambdas,
                                   double h, double tol) {
  SpectralDensities out;
  out.lambda = lambdas;
  const std::size_t L = lambdas.size();
  out.nu_p.resize(L);
  out.nu_m.resize(L);
  out.omega_p.resize(L);
  out.flag_singular.resize(L);
  // Solve line by line in eta so each lambda sweep can warm start.
  const double etas[3] = {4.0 * h, 2.0 * h, h};
  std::vector<Complex> rp[3], rm[3];
  for (int e = 0; e < 3; ++e) {
    rp[e].resize(L);
    rm[e].resize(L);
    ResolventPair warm;
    bool have_warm = false;
    for (std::size_t i = 0; i < L; ++i) {
      const ResolventPair p = solve_pair(
          dos, s, v, Complex(lambdas[i], etas[e]), tol,
          have_warm ? &warm : nullptr);
      rp[e][i] = p.rp;
      rm[e][i] = p.rm;
      warm = p;
      have_warm = true;
    }
  }
  for (std::size_t i = 0; i < L; ++i) {
    const Complex bp = richardson3(rp[2][i], rp[1][i], rp[0][i]);
    const Complex bm = richardson3(rm[2][i], rm[1][i], rm[0][i]);
    const Complex bp2 = richardson2(rp[2][i], rp[1][i]);
    const Complex bm2 = richardson2(rm[2][i], rm[1][i]);
    out.nu_p[i] = std::max(0.0, bp.imag()) / M_PI;
    out.nu_m[i] = std::max(0.0, bm.imag()) / M_PI;
    const double tot = out.nu_p[i] + out.nu_m[i];
    out.omega_p[i] = tot > 0.0 ? out.nu_p[i] / tot : 0.5;
    out.flag_singular[i] =
        (std::abs(bp - bp2) > 1e-4 || std::abs(bm - bm2) > 1e-4) ? 1 : 0;
  }
  return out;
}

double conditional_density_at(double E, int idx, double s, double v,
                              const BoundaryResolvent& b) {
  const double v2 = v * v;
  const double alpha = spin_sign(idx);
  const Complex rother = b.r(1 - idx);
  const double nu_other = std::max(0.0, rother.imag()) / M_PI;
  const double core = E + s * alpha - b.lambda - v2 * rother.real();
  const double den =
      core * core + M_PI * M_PI * v2 * v2 * nu_other * nu_other;
  if (den <= 0.0) return 0.0;
  return v2 * nu_other / den;
}

ReducedState equilibrium_microcanonical(const DensityOfStates& dos, double s,
                                        double v, double lambda, double h) {
  const BoundaryResolvent b = boundary_resolvent(dos, s, v, lambda, h);
  const double np = b.nu(0);
  const double nm = b.nu(1);
  const double tot = np + nm;
  if (!(tot > 0.0))
    throw std::domain_error("no spectral weight at the requested energy");
  return ReducedState::diagonal(np / tot, nm / tot);
}

ReducedState equilibrium_canonical(const DensityOfStates& dos, double s,
                                   double v, double beta, double h) {
  auto window = dos.mass_window();
  const double pad = std::abs(s) + 2.0 * std::abs(v) + 1.0;
  double lo = window.first - pad;
  double hi = window.second + pad;

  // The dressed spectrum lives within pad of the level support, and its
  // density is bounded by a modest multiple of the nearby level density.
  // An envelope of the bare density therefore bounds the dressed one; it is
  // noise-free, so it can steer the window and gate out regions where
  // exp(-beta lam) would amplify resolvent noise above the real mass.
  const auto envelope = [&](double lam) {
    double m = 0.0;
    for (int i = 0; i <= 8; ++i)
      m = std::max(m, dos.eval(lam - pad + 2.0 * pad * double(i) / 8.0));
    return m;
  };
  const auto bare_weight = [&](double lam) {
    return std::exp(-beta * lam) * envelope(lam);
  };

  const auto weight = [&](double lam) -> std::pair<double, double> {
    const BoundaryResolvent b = boundary_resolvent(dos, s, v, lam, h, 1e-12);
    const double w = std::exp(-beta * lam);
    const double clamp = 100.0 * envelope(lam);
    return {w * std::min(b.nu(0), clamp), w * std::min(b.nu(1), clamp)};
  };

  // Locate the bare-weight peak on a coarse scan, then expand the window
  // until the edges fall below 1e-16 of it.
  const int kScan = 257;
  double peak = 0.0;
  for (int i = 0; i < kScan; ++i) {
    const double lam = lo + (hi - lo) * double(i) / double(kScan - 1);
    peak = std::max(peak, bare_weight(lam));
  }
  if (!(peak > 0.0) || !std::isfinite(peak))
    throw std::domain_error("canonical weight carries no representable mass");
  const double cut = 1e-16 * peak;
  for (int guard = 0; guard < 60; ++guard) {
    if (!(bare_weight(lo) > cut) || !std::isfinite(bare_weight(lo))) break;
    lo -= 0.25 * (hi - lo);
  }
  for (int guard = 0; guard < 60; ++guard) {
    if (!(bare_weight(hi) > cut) || !std::isfinite(bare_weight(hi))) break;
    hi += 0.25 * (hi - lo);
  }

  // Composite Simpson on a fixed fine grid (boundary solves dominate cost);
  // nodes with no representable bare mass contribute exactly zero.
  const int N = 1024;  // panels; N+1 nodes
  const double step = (hi - lo) / N;
  double num_p = 0.0, num_m = 0.0;
  for (int i = 0; i <= N; ++i) {
    const double lam = lo + step * i;
    if (bare_weight(lam) < 1e-18 * peak) continue;
    const auto [a, b] = weight(lam);
    const double c = (i == 0 || i == N) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    num_p += c * a;
    num_m += c * b;
  }
  num_p *= step / 3.0;
  num_m *= step / 3.0;
  const double tot = num_p + num_m;
  if (!(tot > 0.0) || !std::isfinite(tot))
    throw std::domain_error("canonical quadrature lost all mass");
  return ReducedState::diagonal(num_p / tot, num_m / tot);
}

TailRatioResult tail_ratio(const DensityOfStates& family, double s, double v,
                           int J, double e, int idx) {
  if (family.kind() != DensityOfStates::Kind::GaussianConvolution)
    throw std::invalid_argument("tail_ratio needs the Gaussian family");
  const double a = family.scale();
  const double e0 = family.offset();
  const DensityOfStates dos =
      DensityOfStates::gaussian_convolution(J, a, e0);
  const double lambda = double(J) * e;
  const double nu0 = dos.eval(lambda);
  if (nu0 < 1e-300)
    throw std::domain_error("tail density underflows; use a smaller count");

  const double h = 1e-3;
  const double tol = 1e-13;
  const BoundaryResolvent b = boundary_resolvent(dos, s, v, lambda, h, tol);

  TailRatioResult out;
  out.nu0 = nu0;
  out.nu_alpha = b.nu(idx);
  out.ratio = out.nu_alpha / nu0;
  const double beta = dos.rate_function(J, e).beta;
  out.limit = std::exp(-beta * s * spin_sign(idx));
  out.bound = std::sqrt(M_PI / (2.0 * J * a * a));
  out.max_abs_r = std::abs(b.r(idx));
  if (out.max_abs_r > out.bound * (1.0 + 1e-9))
    throw SolverError("tail solve exceeds the analytic resolvent bound", 0.0);
  return out;
}
SelfEnergyField solve_self_energy(const DensityOfStates& dos, double s,
                                  double v, const BandKernel& kernel,
                                  const std::vector<double>& Es,
                                  const std::vector<Complex>& zs,
                                  double tol) {
  if (!kernel.f) throw std::invalid_argument("band kernel is empty");
  const std::size_t n = Es.size();
  if (n == 0) throw std::invalid_argument("self-energy grid is empty");
  for (std::size_t i = 1; i < n; ++i)
    if (!(Es[i] >= Es[i - 1]))
      throw std::invalid_argument("self-energy grid must be ascending");

  SelfEnergyField out;
  out.s = s;
  out.v = v;
  out.zs = zs;
  out.Es = Es;
  out.delta_p.resize(zs.size());
  out.delta_m.resize(zs.size());

  // Mid-quantile Nystrom rule: the density integral becomes a mean over the
  // grid. Local kernels couple each node only to a window of neighbors.
  const double v2 = v * v;
  std::vector<std::size_t> wlo(n, 0), whi(n, n);
  const bool local = std::isfinite(kernel.width);
  if (local) {
    const double reach = 50.0 * kernel.width;
    std::size_t a = 0, b = 0;
    for (std::size_t i = 0; i < n; ++i) {
      while (a < n && Es[a] < Es[i] - reach) ++a;
      while (b < n && Es[b] <= Es[i] + reach) ++b;
      wlo[i] = a;
      whi[i] = b;
    }
  }
  // Kernel values cached as one flat band unless that would be excessive.
  std::size_t total = 0;
  for (std::size_t i = 0; i < n; ++i) total += whi[i] - wlo[i];
  const bool cache = total <= (std::size_t{1} << 25);
  std::vector<double> fband;
  std::vector<std::size_t> off(n, 0);
  if (cache) {
    fband.resize(total);
    std::size_t pos = 0;
    for (std::size_t i = 0; i < n; ++i) {
      off[i] = pos;
      for (std::size_t j = wlo[i]; j < whi[i]; ++j)
        fband[pos++] = kernel.f(Es[i], Es[j]);
    }
  }
  const auto fval = [&](std::size_t i, std::size_t j) {
    return cache ? fband[off[i] + (j - wlo[i])] : kernel.f(Es[i], Es[j]);
  };

  const int max_sweeps = 2000;
  for (std::size_t zi = 0; zi < zs.size(); ++zi) {
    const Complex z = zs[zi];
    std::vector<Complex> dP(n), dM(n);
    {
      // seed at the kernel-free fixed point
      const ResolventPair seed = solve_pair(dos, s, v, z, tol);
      std::fill(dP.begin(), dP.end(), v2 * seed.rp);
      std::fill(dM.begin(), dM.end(), v2 * seed.rm);
    }
    std::vector<Complex> gP(n), gM(n), nP(n), nM(n);
    double res = std::numeric_limits<double>::infinity();
    double theta = 0.5;
    int it = 0;
    while (it < max_sweeps) {
      for (std::size_t j = 0; j < n; ++j) {
        gP[j] = 1.0 / (Es[j] + s - z - dM[j]);
        gM[j] = 1.0 / (Es[j] - s - z - dP[j]);
      }
      const double scale = v2 / static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) {
        Complex accP(0.0, 0.0), accM(0.0, 0.0);
        for (std::size_t j = wlo[i]; j < whi[i]; ++j) {
          const double f = fval(i, j);
          accP += f * gP[j];
          accM += f * gM[j];
        }
        nP[i] = scale * accP;
        nM[i] = scale * accM;
      }
      double r = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        r = std::max({r, std::abs(nP[i] - dP[i]), std::abs(nM[i] - dM[i])});
      for (std::size_t i = 0; i < n; ++i) {
        dP[i] = (1.0 - theta) * dP[i] + theta * nP[i];
        dM[i] = (1.0 - theta) * dM[i] + theta * nM[i];
      }
      if (r > res && theta > 0.02) theta *= 0.5;
      res = r;
      ++it;
      if (res <= tol) break;
    }
    if (res > tol)
      throw SolverError("self-energy solve did not converge", res);
    out.delta_p[zi] = dP;
    out.delta_m[zi] = dM;
    out.residual = std::max(out.residual, res);
    out.iterations = std::max(out.iterations, it);

    // Half-plane sign condition of the field.
    if (z.imag() != 0.0) {
      const double sz = z.imag() > 0.0 ? 1.0 : -1.0;
      for (std::size_t ei = 0; ei < n; ++ei) {
        if (dP[ei].imag() * sz < -1e-12 || dM[ei].imag() * sz < -1e-12)
          throw SolverError("self-energy violates the sign condition", res);
      }
    }
  }
  return out;
}

}  // namespace rmx
