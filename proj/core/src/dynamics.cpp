// dynamics.cpp: relaxation dynamics of the two-level system coupled to the
// infinite reservoir. Populations come from a two-argument resolvent
// transform evaluated on a small-height ladder: the stationary ridge is
// integrated out analytically at each height, the regular remainder is an
// oscillatory frequency integral, and the ladder is Richardson-extrapolated.
// Coherences use the damped contour transform at the base height, which is
// height-independent because the integrand is regular across the axis.
// SPDX-License-Identifier: Apache-2.0
#include "rmx/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rmx/numerics.hpp"

namespace rmx {
namespace {

constexpr double kPi = 3.14159265358979323846;

double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

// ---------------------------------------------------------------------------
// Resolvent line cache: (r_+, r_-) sampled uniformly along Im z = eta with
// stored z-derivatives. Values interpolate by cubic Hermite, derivatives
// linearly; new nodes warm-start from their neighbor. Node j sits at
// x = j * dx, so independently grown ranges share exact node positions.

class Line {
 public:
  Line(const DensityOfStates& dos, double s, double v, double eta, double dx,
       double tol)
      : dos_(&dos), s_(s), v_(v), eta_(eta), dx_(dx), tol_(tol) {}

  double eta() const { return eta_; }

  // Extends the cache to cover [lo, hi] with one spare node on each side.
  void ensure(double lo, double hi) {
    const long jlo = static_cast<long>(std::floor(lo / dx_)) - 1;
    const long jhi = static_cast<long>(std::ceil(hi / dx_)) + 1;
    if (rp_.empty()) {
      i0_ = jlo;
      ResolventPair warm;
      for (long j = jlo; j <= jhi; ++j) {
        warm = solve_node(j, j == jlo ? nullptr : &warm);
        push_node(warm, j);
      }
      check_budget();
      return;
    }
    if (jhi > last_index()) {
      ResolventPair warm = node_pair(rp_.size() - 1);
      for (long j = last_index() + 1; j <= jhi; ++j) {
        warm = solve_node(j, &warm);
        push_node(warm, j);
      }
    }
    if (jlo < i0_) {
      std::vector<Complex> arp, arm, adp, adm;
      const std::size_t add = static_cast<std::size_t>(i0_ - jlo);
      arp.reserve(add);
      arm.reserve(add);
      adp.reserve(add);
      adm.reserve(add);
      ResolventPair warm = node_pair(0);
      for (long j = i0_ - 1; j >= jlo; --j) {
        warm = solve_node(j, &warm);
        const auto d = pair_derivs(*dos_, s_, v_, z_at(j), warm);
        arp.push_back(warm.rp);
        arm.push_back(warm.rm);
        adp.push_back(d.first);
        adm.push_back(d.second);
      }
      std::reverse(arp.begin(), arp.end());
      std::reverse(arm.begin(), arm.end());
      std::reverse(adp.begin(), adp.end());
      std::reverse(adm.begin(), adm.end());
      rp_.insert(rp_.begin(), arp.begin(), arp.end());
      rm_.insert(rm_.begin(), arm.begin(), arm.end());
      dp_.insert(dp_.begin(), adp.begin(), adp.end());
      dm_.insert(dm_.begin(), adm.begin(), adm.end());
      i0_ = jlo;
    }
    check_budget();
  }

  void values(double x, Complex& rp, Complex& rm) const {
    const double q = x / dx_ - static_cast<double>(i0_);
    long i = static_cast<long>(std::floor(q));
    const long imax = static_cast<long>(rp_.size()) - 2;
    if (i < 0) i = 0;
    if (i > imax) i = imax;
    const double t = q - static_cast<double>(i);
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    const double h10 = t3 - 2.0 * t2 + t;
    const double h01 = 3.0 * t2 - 2.0 * t3;
    const double h11 = t3 - t2;
    const std::size_t k = static_cast<std::size_t>(i);
    rp = h00 * rp_[k] + h01 * rp_[k + 1] + dx_ * (h10 * dp_[k] + h11 * dp_[k + 1]);
    rm = h00 * rm_[k] + h01 * rm_[k + 1] + dx_ * (h10 * dm_[k] + h11 * dm_[k + 1]);
  }

  void derivs(double x, Complex& rpd, Complex& rmd) const {
    const double q = x / dx_ - static_cast<double>(i0_);
    long i = static_cast<long>(std::floor(q));
    const long imax = static_cast<long>(rp_.size()) - 2;
    if (i < 0) i = 0;
    if (i > imax) i = imax;
    const double t = q - static_cast<double>(i);
    const std::size_t k = static_cast<std::size_t>(i);
    rpd = (1.0 - t) * dp_[k] + t * dp_[k + 1];
    rmd = (1.0 - t) * dm_[k] + t * dm_[k + 1];
  }

 private:
  static constexpr std::size_t kMaxNodes = 6000000;

  Complex z_at(long j) const {
    return Complex(dx_ * static_cast<double>(j), eta_);
  }
  ResolventPair solve_node(long j, const ResolventPair* warm) const {
    return solve_pair(*dos_, s_, v_, z_at(j), tol_, warm);
  }
  ResolventPair node_pair(std::size_t k) const {
    ResolventPair p;
    p.rp = rp_[k];
    p.rm = rm_[k];
    return p;
  }
  void push_node(const ResolventPair& p, long j) {
    const auto d = pair_derivs(*dos_, s_, v_, z_at(j), p);
    rp_.push_back(p.rp);
    rm_.push_back(p.rm);
    dp_.push_back(d.first);
    dm_.push_back(d.second);
  }
  long last_index() const { return i0_ + static_cast<long>(rp_.size()) - 1; }
  void check_budget() const {
    if (rp_.size() > kMaxNodes)
      throw std::runtime_error("evolve_analytic: frequency grid exploded");
  }

  const DensityOfStates* dos_;
  double s_, v_, eta_, dx_, tol_;
  long i0_ = 0;
  std::vector<Complex> rp_, rm_, dp_, dm_;
};

// ---------------------------------------------------------------------------
// Uniform frequency sections. Every section has an even panel count so it is
// Simpson/Filon composable on its own; adjacent sections share only their
// endpoint value conceptually (each stores its own copy of the node).

struct Section {
  double a = 0.0;       // left endpoint
  double h = 0.0;       // node step
  int count = 0;        // node count, odd
  std::size_t off = 0;  // first node's index into the flat node list
};

void append_section(double a, double b, double step, std::vector<Section>& secs,
                    std::vector<double>& xs) {
  int panels = static_cast<int>(std::ceil((b - a) / step - 1e-9));
  if (panels < 2) panels = 2;
  if (panels % 2) ++panels;
  Section s;
  s.a = a;
  s.h = (b - a) / panels;
  s.count = panels + 1;
  s.off = xs.size();
  for (int i = 0; i <= panels; ++i) xs.push_back(a + s.h * i);
  secs.push_back(s);
}

void chain_sections(const std::vector<double>& brk,
                    const std::vector<double>& steps,
                    std::vector<Section>& secs, std::vector<double>& xs) {
  for (std::size_t i = 0; i + 1 < brk.size(); ++i)
    append_section(brk[i], brk[i + 1], steps[i], secs, xs);
}

// ---------------------------------------------------------------------------
// Width scales: a two-stage probe of the solved pair along a horizontal line
// fixes the spectral peak, the base height h and the width scale w.

struct Scales {
  double h = 0.0;     // base contour height
  double w = 0.0;     // spectral width scale
  double peak = 0.0;  // max of (Im r_+ + Im r_-)/pi along the probe line
  double span = 0.0;  // padded probe span
};

double probe_peak(const DensityOfStates& dos, double s, double v, double lo,
                  double hi, double eta, double tol) {
  const int n = 2000;
  const double step = (hi - lo) / n;
  double peak = 0.0;
  ResolventPair warm;
  for (int i = 0; i <= n; ++i) {
    const Complex z(lo + step * i, eta);
    warm = solve_pair(dos, s, v, z, tol, i == 0 ? nullptr : &warm);
    peak = std::max(peak, (warm.rp.imag() + warm.rm.imag()) / kPi);
  }
  return peak;
}

Scales estimate_scales(const DensityOfStates& dos, double s, double v,
                       double eta_override, double tol) {
  const auto win = dos.mass_window();
  const double pad = std::abs(s) + 2.0 * std::abs(v) + 1.0;
  const double lo = win.first - pad, hi = win.second + pad;
  Scales sc;
  sc.span = hi - lo;
  const double peak1 = probe_peak(dos, s, v, lo, hi, 2e-3 * sc.span, tol);
  const double eta2 =
      eta_override > 0.0
          ? eta_override
          : std::max(v * v * kPi * peak1 / 8.0, 1e-12 * sc.span);
  sc.peak = probe_peak(dos, s, v, lo, hi, eta2, tol);
  if (!(sc.peak > 0.0))
    throw std::invalid_argument(
        "spectral probe found no mass near the level window");
  sc.h = eta_override > 0.0 ? eta_override : v * v * kPi * sc.peak / 32.0;
  sc.w = 2.0 * (4.0 * sc.h + v * v * kPi * sc.peak);
  return sc;
}

// ---------------------------------------------------------------------------
// Pointwise kernels. Index convention: out[pair_index(a, d)] with a the
// arrival level and d the start level.

// Stationary-ridge integrand at centre frequency lam for one height line.
// Its (2 pi)^-1 integral over lam is the height-regularized long-time
// transition matrix; columns integrate to the start-level line density.
void stat_integrand(double E, double s, double v, double eta, double lam,
                    const Complex& Rp, const Complex& Rm, double* out) {
  const double v2 = v * v;
  const Complex denp = Complex(E + s - lam, -eta) - v2 * Rm;
  const Complex denm = Complex(E - s - lam, -eta) - v2 * Rp;
  const double imrEp = (1.0 / denp).imag();
  const double imrEm = (1.0 / denm).imag();
  const double gp = eta + v2 * Rp.imag();
  const double gm = eta + v2 * Rm.imag();
  const double gsum = eta + v2 * (Rp.imag() + Rm.imag());
  out[0] = 2.0 * imrEp * gp / gsum;
  out[1] = 2.0 * v2 * imrEm * Rp.imag() / gsum;
  out[2] = 2.0 * v2 * imrEp * Rm.imag() / gsum;
  out[3] = 2.0 * imrEm * gm / gsum;
}

// Population-sector kernel at (lam, u) with the stationary ridge subtracted;
// even in u. sI must hold stat_integrand built from the same interpolated
// pair at lam, which makes the ridge subtraction exact at u = 0.
void diag_kernel(double E, double s, double v, double eta, double lam,
                 double u, const Line& line, const double* sI, double* out,
                 std::size_t* resonant) {
  const double v2 = v * v;
  const double sa[2] = {s, -s};
  if (u == 0.0) {
    Complex Rp, Rm, rdp, rdm;
    line.values(lam, Rp, Rm);
    line.derivs(lam, rdp, rdm);
    const Complex R[2] = {Rp, Rm};
    const Complex rd[2] = {rdp, rdm};
    Complex rEd[2];
    for (int a = 0; a < 2; ++a) {
      const Complex rE = 1.0 / (Complex(E + sa[a] - lam, -eta) - v2 * R[1 - a]);
      rEd[a] = rE * rE * (1.0 + v2 * rd[1 - a]);
    }
    const Complex den0 = 1.0 + v2 * (rd[0] + rd[1]);
    for (int a = 0; a < 2; ++a) {
      const int o = 1 - a;
      out[a * 2 + a] = -2.0 * (rEd[a] * (1.0 + v2 * rd[a]) / den0).real();
      out[a * 2 + o] = -2.0 * (v2 * rEd[o] * rd[a] / den0).real();
    }
    return;
  }
  const double x1 = lam + 0.5 * u, x2 = lam - 0.5 * u;
  Complex R1p, R1m, R2p, R2m;
  line.values(x1, R1p, R1m);
  line.values(x2, R2p, R2m);
  const Complex R1[2] = {R1p, R1m};
  const Complex R2[2] = {R2p, R2m};
  const Complex R2c[2] = {std::conj(R2p), std::conj(R2m)};
  const Complex dzm(u, 2.0 * eta);
  Complex drm[2], drp[2], drEm[2], drEp[2];
  for (int a = 0; a < 2; ++a) {
    const int o = 1 - a;
    const Complex rE1 = 1.0 / (Complex(E + sa[a] - x1, -eta) - v2 * R1[o]);
    const Complex rE2m = 1.0 / (Complex(E + sa[a] - x2, eta) - v2 * R2c[o]);
    const Complex rE2p = 1.0 / (Complex(E + sa[a] - x2, -eta) - v2 * R2[o]);
    drm[a] = R1[a] - R2c[a];
    drp[a] = R1[a] - R2[a];
    drEm[a] = rE1 - rE2m;
    drEp[a] = rE1 - rE2p;
  }
  const Complex den2m = dzm + v2 * (drm[0] + drm[1]);
  const Complex den2p = u + v2 * (drp[0] + drp[1]);
  const double u2e = u * u + 4.0 * eta * eta;
  if (resonant && std::abs(den2p) < eta && std::abs(u) > 15.9 * eta)
    ++*resonant;
  for (int a = 0; a < 2; ++a) {
    const int o = 1 - a;
    out[a * 2 + a] =
        2.0 * (drEm[a] * (dzm + v2 * drm[a]) / (dzm * den2m)).real() -
        4.0 * eta * sI[a * 2 + a] / u2e -
        2.0 * (drEp[a] * (u + v2 * drp[a]) / (u * den2p)).real();
    out[a * 2 + o] =
        2.0 * (v2 * drEm[o] * drm[a] / (dzm * den2m)).real() -
        4.0 * eta * sI[a * 2 + o] / u2e -
        2.0 * (v2 * drEp[o] * drp[a] / (u * den2p)).real();
  }
}

// Coherence-sector corner kernel at (lam, u). The first argument sits on the
// upper line; the second on the upper (sigma2 > 0) or lower (sigma2 < 0)
// line. out[row * 2 + basis]: row 0 relaxes the (+-) entry, row 1 the (-+)
// entry; basis 0 multiplies the seed coherence, basis 1 its conjugate.
void coherence_corner(double E, double s, double v, double eta, double wscale,
                      double lam, double u, int sigma2, const Line& line,
                      Complex* out) {
  const double v2 = v * v;
  const double x1 = lam + 0.5 * u, x2 = lam - 0.5 * u;
  Complex R1p, R1m;
  line.values(x1, R1p, R1m);
  if (u == 0.0 && sigma2 > 0 && std::abs(2.0 * s) < 1e-8 * wscale) {
    // coincident-argument limit of the symmetric corner
    Complex rdp, rdm;
    line.derivs(lam, rdp, rdm);
    const Complex rd = rdp;
    const Complex rE = 1.0 / (Complex(E - lam, -eta) - v2 * R1p);
    const Complex rEd = rE * rE * (1.0 + v2 * rd);
    const Complex den = 1.0 + 2.0 * v2 * rd;
    const Complex own = rEd * (1.0 + v2 * rd) / den;
    const Complex cross = v2 * rd * rEd / den;
    out[0] = own;
    out[1] = cross;
    out[2] = own;
    out[3] = cross;
    return;
  }
  Complex R2p, R2m;
  line.values(x2, R2p, R2m);
  const Complex R1[2] = {R1p, R1m};
  Complex R2[2];
  Complex dz;
  double im2;  // imaginary part of the second-argument level denominators
  if (sigma2 > 0) {
    R2[0] = R2p;
    R2[1] = R2m;
    dz = Complex(u, 0.0);
    im2 = -eta;
  } else {
    R2[0] = std::conj(R2p);
    R2[1] = std::conj(R2m);
    dz = Complex(u, 2.0 * eta);
    im2 = eta;
  }
  const double sa[2] = {s, -s};
  Complex rE1[2], rE2[2];
  for (int a = 0; a < 2; ++a) {
    const int o = 1 - a;
    rE1[a] = 1.0 / (Complex(E + sa[a] - x1, -eta) - v2 * R1[o]);
    rE2[a] = 1.0 / (Complex(E + sa[a] - x2, im2) - v2 * R2[o]);
  }
  const Complex dr_pm = R1[0] - R2[1];
  const Complex dr_mp = R1[1] - R2[0];
  const Complex drE_pm = rE1[0] - rE2[1];
  const Complex drE_mp = rE1[1] - rE2[0];
  const Complex Dpm = dz - 2.0 * s + v2 * dr_mp;
  const Complex Dmp = dz + 2.0 * s + v2 * dr_pm;
  const Complex Dfull = Dpm * Dmp - v2 * v2 * dr_pm * dr_mp;
  out[0] = drE_pm * Dmp / Dfull;
  out[1] = v2 * dr_pm * drE_mp / Dfull;
  out[2] = drE_mp * Dpm / Dfull;
  out[3] = v2 * dr_mp * drE_pm / Dfull;
}

// ---------------------------------------------------------------------------
// Sector state for the centre-frequency window accumulation.

struct DiagSector {
  double eta = 0.0;
  Line line;
  std::vector<Section> secs;
  std::vector<double> us;
  std::array<std::vector<double>, 4> kacc{};
  std::array<double, 4> stat{};
  int tail_blocks = 0;
};

struct CohSector {
  bool active = false;
  std::vector<Section> secs;
  std::vector<double> us;
  std::array<std::vector<Complex>, 8> acc{};  // (row * 2 + basis) * 2 + corner
  std::size_t pos_idx = 0;                    // node index of the +u extreme
  std::size_t neg_idx = 0;                    // node index of the -u extreme
  double pos_end = 0.0;
  double neg_end = 0.0;
  int tail_blocks = 0;
};

}  // namespace

EvolutionResult evolve_analytic(const DensityOfStates& dos, double s, double v,
                                double E, const ReducedState& rho0,
                                const std::vector<double>& times,
                                const EvolveOptions& opt) {
  if (!(v > 0.0))
    throw std::invalid_argument("evolve_analytic: positive coupling required");
  try {
    rho0.validate(1e-9);
  } catch (const std::exception& e) {
    throw std::invalid_argument(std::string("evolve_analytic: invalid rho0: ") +
                                e.what());
  }
  for (const double t : times)
    if (!(t >= 0.0))
      throw std::invalid_argument("evolve_analytic: negative time requested");
  if (!(dos.eval(E) > 0.0))
    throw std::invalid_argument(
        "evolve_analytic: level density vanishes at the target energy");

  const Scales sc = estimate_scales(dos, s, v, opt.eta, opt.tolerance);
  const double h = sc.h;
  const double w = sc.w;
  double lattice_step = w / 12.0;  // centre-frequency lattice step
  if (!dos.sharp_points().empty()) {
    // hard spectral edges leave height-wide spikes; resolve them
    int refine = 1;
    while (refine < 16 && lattice_step / refine > 0.5 * h) refine *= 2;
    lattice_step /= refine;
  }
  const double hl = lattice_step;
  const double dx = w / 24.0;  // resolvent cache step

  // Height ladder {h, 2h, 4h} with per-height frequency sections.
  std::vector<DiagSector> diags;
  diags.reserve(3);
  for (int L = 0; L < 3; ++L) {
    const double eta = h * static_cast<double>(1 << L);
    DiagSector d{eta, Line(dos, s, v, eta, dx, opt.tolerance), {}, {}, {}, {}, 0};
    const double cap = std::max(48.0 * w, 2.0 * std::abs(s) + 16.0 * w);
    const double b1 = 16.0 * eta;
    const double b2 = std::max(4.0 * w, 2.0 * b1);
    const double b3 = std::max(40.0 * w, 2.0 * b2);
    const double b4 = std::max(cap, b3 + 16.0 * w);
    chain_sections({0.0, b1, b2, b3, b4},
                   {eta / 2.0, w / 16.0, w / 2.0, 4.0 * w}, d.secs, d.us);
    for (auto& acc : d.kacc) acc.assign(d.us.size(), 0.0);
    diags.push_back(std::move(d));
  }

  CohSector coh;
  coh.active = opt.with_coherence && std::abs(rho0.pm) != 0.0;
  if (coh.active) {
    const double c1 = 16.0 * h;
    const double c2 = std::max(2.0 * std::abs(s) + 4.0 * w, 2.0 * c1);
    const double c3 = std::max(2.0 * std::abs(s) + 40.0 * w, c2 + 16.0 * w);
    const double c4 = c3 + 8.0 * w;
    chain_sections({0.0, c1, c2, c3, c4},
                   {h / 2.0, w / 16.0, w / 2.0, 4.0 * w}, coh.secs, coh.us);
    const std::size_t npos = coh.secs.size();
    coh.pos_idx = coh.secs.back().off + coh.secs.back().count - 1;
    coh.pos_end = coh.us[coh.pos_idx];
    // mirror image of every positive section, node values negated exactly
    for (std::size_t i = 0; i < npos; ++i) {
      const Section p = coh.secs[i];
      Section m;
      m.h = p.h;
      m.count = p.count;
      m.off = coh.us.size();
      m.a = -(p.a + p.h * (p.count - 1));
      for (int j = p.count - 1; j >= 0; --j)
        coh.us.push_back(-coh.us[p.off + static_cast<std::size_t>(j)]);
      coh.secs.push_back(m);
    }
    coh.neg_idx = coh.secs.back().off;
    coh.neg_end = coh.us[coh.neg_idx];
    for (auto& acc : coh.acc) acc.assign(coh.us.size(), Complex(0.0, 0.0));
  }

  // ---- centre-frequency window accumulation ----
  double peak_si = 0.0;
  std::size_t resonant = 0;

  const auto cover = [&](double lamlo, double lamhi) {
    for (std::size_t L = 0; L < diags.size(); ++L) {
      double umax = diags[L].us.back();
      if (L == 0 && coh.active)
        umax = std::max({umax, coh.pos_end, -coh.neg_end});
      diags[L].line.ensure(lamlo - 0.5 * umax - 2.0 * dx,
                           lamhi + 0.5 * umax + 2.0 * dx);
    }
  };

  const auto column = [&](double lam, double wj) {
    double sI[4], K[4];
    for (std::size_t L = 0; L < diags.size(); ++L) {
      DiagSector& d = diags[L];
      Complex Rp, Rm;
      d.line.values(lam, Rp, Rm);
      stat_integrand(E, s, v, d.eta, lam, Rp, Rm, sI);
      for (int q = 0; q < 4; ++q) {
        d.stat[q] += wj * sI[q];
        peak_si = std::max(peak_si, std::abs(sI[q]));
      }
      for (std::size_t k = 0; k < d.us.size(); ++k) {
        diag_kernel(E, s, v, d.eta, lam, d.us[k], d.line, sI, K,
                    L == 0 ? &resonant : nullptr);
        for (int q = 0; q < 4; ++q) d.kacc[q][k] += wj * K[q];
      }
    }
    if (coh.active) {
      Complex cout[4];
      for (std::size_t k = 0; k < coh.us.size(); ++k)
        for (int c = 0; c < 2; ++c) {
          coherence_corner(E, s, v, h, w, lam, coh.us[k], c == 0 ? 1 : -1,
                           diags[0].line, cout);
          for (int rb = 0; rb < 4; ++rb) coh.acc[rb * 2 + c][k] += wj * cout[rb];
        }
    }
  };

  const auto process_block = [&](long a, long b) {
    cover(E + hl * static_cast<double>(a), E + hl * static_cast<double>(b));
    for (long j = a; j <= b; ++j) {
      const bool edge = (j == a || j == b);
      const double wj =
          (hl / 3.0) * (edge ? 1.0 : (((j - a) % 2) ? 4.0 : 2.0));
      column(E + hl * static_cast<double>(j), wj);
    }
  };

  const auto edge_stat = [&](long j) {
    const double lam = E + hl * static_cast<double>(j);
    cover(lam, lam);
    double m = 0.0;
    double sI[4];
    for (auto& d : diags) {
      Complex Rp, Rm;
      d.line.values(lam, Rp, Rm);
      stat_integrand(E, s, v, d.eta, lam, Rp, Rm, sI);
      for (int q = 0; q < 4; ++q) m = std::max(m, std::abs(sI[q]));
    }
    return m;
  };

  long jlo = 0, jhi = 0;
  {
    long J0 = static_cast<long>(std::ceil((std::abs(s) + 8.0 * w) / hl));
    J0 = ((J0 + 15) / 16) * 16;
    process_block(-J0, J0);
    jlo = -J0;
    jhi = J0;
  }

  // Simpson weights of the full processed window, used when freshly appended
  // frequency nodes must be integrated over everything already covered.
  const auto full_window_weight = [&](long j) {
    const bool edge = (j == jlo || j == jhi);
    return (hl / 3.0) * (edge ? 1.0 : (((j - jlo) % 2) ? 4.0 : 2.0));
  };

  const auto eval_diag_tail = [&](DiagSector& d, std::size_t k0) {
    cover(E + hl * static_cast<double>(jlo), E + hl * static_cast<double>(jhi));
    double sI[4], K[4];
    for (long j = jlo; j <= jhi; ++j) {
      const double lam = E + hl * static_cast<double>(j);
      const double wj = full_window_weight(j);
      Complex Rp, Rm;
      d.line.values(lam, Rp, Rm);
      stat_integrand(E, s, v, d.eta, lam, Rp, Rm, sI);
      for (std::size_t k = k0; k < d.us.size(); ++k) {
        diag_kernel(E, s, v, d.eta, lam, d.us[k], d.line, sI, K, nullptr);
        for (int q = 0; q < 4; ++q) d.kacc[q][k] += wj * K[q];
      }
    }
  };

  const auto eval_coh_tail = [&](std::size_t k0) {
    cover(E + hl * static_cast<double>(jlo), E + hl * static_cast<double>(jhi));
    Complex cout[4];
    for (long j = jlo; j <= jhi; ++j) {
      const double lam = E + hl * static_cast<double>(j);
      const double wj = full_window_weight(j);
      for (std::size_t k = k0; k < coh.us.size(); ++k)
        for (int c = 0; c < 2; ++c) {
          coherence_corner(E, s, v, h, w, lam, coh.us[k], c == 0 ? 1 : -1,
                           diags[0].line, cout);
          for (int rb = 0; rb < 4; ++rb) coh.acc[rb * 2 + c][k] += wj * cout[rb];
        }
    }
  };

  const double tail_gate = opt.tail_target * 4.0 * kPi * kPi / 8.0;
  int blo = 0, bhi = 0;
  for (;;) {
    bool changed = false;
    while (blo < opt.max_window_blocks && edge_stat(jlo) > 1e-6 * peak_si) {
      process_block(jlo - 16, jlo);
      jlo -= 16;
      ++blo;
      changed = true;
    }
    while (bhi < opt.max_window_blocks && edge_stat(jhi) > 1e-6 * peak_si) {
      process_block(jhi, jhi + 16);
      jhi += 16;
      ++bhi;
      changed = true;
    }
    for (auto& d : diags) {
      while (d.tail_blocks < opt.max_tail_blocks) {
        const std::size_t kend = d.us.size() - 1;
        double tailv = 0.0;
        for (int q = 0; q < 4; ++q)
          tailv = std::max(tailv, std::abs(d.kacc[q][kend]));
        if (tailv * d.us[kend] <= tail_gate) break;
        const double a = d.us[kend];
        append_section(a, a + 128.0 * w, 4.0 * w, d.secs, d.us);
        for (auto& acc : d.kacc) acc.resize(d.us.size(), 0.0);
        eval_diag_tail(d, kend + 1);
        ++d.tail_blocks;
        changed = true;
      }
    }
    if (coh.active) {
      while (coh.tail_blocks < opt.max_tail_blocks) {
        // only the corner difference survives assembly at large |u|
        double posv = 0.0, negv = 0.0;
        for (int rb = 0; rb < 4; ++rb) {
          posv = std::max(posv, std::abs(coh.acc[rb * 2][coh.pos_idx] -
                                         coh.acc[rb * 2 + 1][coh.pos_idx]));
          negv = std::max(negv, std::abs(coh.acc[rb * 2][coh.neg_idx] -
                                         coh.acc[rb * 2 + 1][coh.neg_idx]));
        }
        const bool pos_bad = posv * coh.pos_end > tail_gate;
        const bool neg_bad = negv * (-coh.neg_end) > tail_gate;
        if (!pos_bad && !neg_bad) break;
        const std::size_t k0 = coh.us.size();
        if (pos_bad) {
          append_section(coh.pos_end, coh.pos_end + 128.0 * w, 4.0 * w,
                         coh.secs, coh.us);
          coh.pos_idx = coh.us.size() - 1;
          coh.pos_end = coh.us[coh.pos_idx];
        }
        if (neg_bad) {
          const std::size_t off = coh.us.size();
          append_section(coh.neg_end - 128.0 * w, coh.neg_end, 4.0 * w,
                         coh.secs, coh.us);
          coh.neg_idx = off;
          coh.neg_end = coh.us[coh.neg_idx];
        }
        for (auto& acc : coh.acc) acc.resize(coh.us.size(), Complex(0.0, 0.0));
        eval_coh_tail(k0);
        ++coh.tail_blocks;
        changed = true;
      }
    }
    if (!changed) break;
  }

  // ---- assembly ----
  const std::size_t nt = times.size();
  std::array<std::array<double, 4>, 3> statv{};
  std::array<std::array<std::vector<double>, 4>, 3> resp;
  for (std::size_t L = 0; L < 3; ++L) {
    const DiagSector& d = diags[L];
    for (int q = 0; q < 4; ++q) {
      statv[L][q] = d.stat[q] / (2.0 * kPi);
      resp[L][q].assign(nt, statv[L][q]);
      for (const Section& sec : d.secs) {
        UniformSection usec;
        usec.a = sec.a;
        usec.h = sec.h;
        usec.f.assign(d.kacc[q].begin() + sec.off,
                      d.kacc[q].begin() + sec.off + sec.count);
        for (std::size_t it = 0; it < nt; ++it)
          resp[L][q][it] += filon_cos(usec, times[it]) / (2.0 * kPi * kPi);
      }
    }
  }
  std::array<double, 4> statr{};
  for (int q = 0; q < 4; ++q)
    statr[q] = richardson3(statv[0][q], statv[1][q], statv[2][q]);

  std::vector<Complex> pmt(nt, Complex(0.0, 0.0));
  double herm = 0.0;
  if (coh.active) {
    std::array<std::vector<UniformSectionC>, 8> ks;
    for (int i = 0; i < 8; ++i)
      for (const Section& sec : coh.secs) {
        UniformSectionC usec;
        usec.a = sec.a;
        usec.h = sec.h;
        usec.f.assign(coh.acc[i].begin() + sec.off,
                      coh.acc[i].begin() + sec.off + sec.count);
        ks[i].push_back(std::move(usec));
      }
    const Complex pm0 = rho0.pm;
    for (std::size_t it = 0; it < nt; ++it) {
      const double t = times[it];
      Complex T[4];
      for (int rb = 0; rb < 4; ++rb) {
        Complex B(0.0, 0.0), Bm(0.0, 0.0), A(0.0, 0.0), Am(0.0, 0.0);
        for (const auto& usec : ks[rb * 2 + 0]) {
          B += filon_exp(usec, -t);
          Bm += filon_exp(usec, t);
        }
        for (const auto& usec : ks[rb * 2 + 1]) {
          A += filon_exp(usec, -t);
          Am += filon_exp(usec, t);
        }
        T[rb] = -(B + std::conj(Bm) - std::exp(2.0 * h * t) * A -
                  std::exp(-2.0 * h * t) * std::conj(Am)) /
                (4.0 * kPi * kPi);
      }
      const Complex F0 = T[0] * pm0 + T[1] * std::conj(pm0);
      const Complex F1 = T[2] * std::conj(pm0) + T[3] * pm0;
      pmt[it] = 0.5 * (F0 + std::conj(F1));
      herm = std::max(herm, std::abs(F0 - std::conj(F1)));
    }
  }

  EvolutionResult out;
  out.times = times;
  out.rho.reserve(nt);
  out.prob.reserve(nt);
  out.regular_component[0].assign(nt, 0.0);
  out.regular_component[1].assign(nt, 0.0);
  double colres = 0.0;
  for (std::size_t it = 0; it < nt; ++it) {
    ProbMatrix P;
    for (int a = 0; a < 2; ++a)
      for (int d = 0; d < 2; ++d) {
        const int q = pair_index(a, d);
        P.p[a][d] = richardson3(resp[0][q][it], resp[1][q][it], resp[2][q][it]);
      }
    for (int d = 0; d < 2; ++d)
      colres = std::max(colres, std::abs(P.column_sum(d) - 1.0));
    const double pp = P.p[0][0] * rho0.pp + P.p[0][1] * rho0.mm;
    const double mm = P.p[1][0] * rho0.pp + P.p[1][1] * rho0.mm;
    out.prob.push_back(P);
    out.rho.push_back(ReducedState::general(pp, mm, pmt[it]));
  }
  for (int a = 0; a < 2; ++a) {
    out.stationary_component[a] =
        statr[pair_index(a, 0)] * rho0.pp + statr[pair_index(a, 1)] * rho0.mm;
    for (std::size_t it = 0; it < nt; ++it)
      out.regular_component[a][it] =
          out.rho[it].diag(a) - out.stationary_component[a];
  }
  ProbMatrix SP;
  for (int d = 0; d < 2; ++d) {
    const double cs = statr[pair_index(0, d)] + statr[pair_index(1, d)];
    colres = std::max(colres, std::abs(cs - 1.0));
    for (int a = 0; a < 2; ++a)
      SP.p[a][d] = cs > 0.0 ? clamp01(statr[pair_index(a, d)] / cs) : 0.5;
  }
  out.stationary_prob = SP;
  out.stationary = ReducedState::diagonal(
      clamp01(SP.p[0][0] * rho0.pp + SP.p[0][1] * rho0.mm),
      clamp01(SP.p[1][0] * rho0.pp + SP.p[1][1] * rho0.mm));

  EvolveDiagnostics dg;
  dg.eta = h;
  dg.width = w;
  dg.window_lo = E + hl * static_cast<double>(jlo);
  dg.window_hi = E + hl * static_cast<double>(jhi);
  dg.u_max = diags[0].us.back();
  dg.resonance_cells = resonant;
  dg.hermiticity_residual = herm;
  dg.column_sum_residual = colres;
  double te = 0.0;
  for (const auto& d : diags) {
    const std::size_t kend = d.us.size() - 1;
    double tailv = 0.0;
    for (int q = 0; q < 4; ++q)
      tailv = std::max(tailv, std::abs(d.kacc[q][kend]));
    te = std::max(te, tailv * d.us[kend] * 2.0 / (4.0 * kPi * kPi));
  }
  if (coh.active) {
    double posv = 0.0, negv = 0.0;
    for (int rb = 0; rb < 4; ++rb) {
      posv = std::max(posv, std::abs(coh.acc[rb * 2][coh.pos_idx] -
                                     coh.acc[rb * 2 + 1][coh.pos_idx]));
      negv = std::max(negv, std::abs(coh.acc[rb * 2][coh.neg_idx] -
                                     coh.acc[rb * 2 + 1][coh.neg_idx]));
    }
    te = std::max(te, posv * coh.pos_end * 2.0 / (4.0 * kPi * kPi));
    te = std::max(te, negv * (-coh.neg_end) * 2.0 / (4.0 * kPi * kPi));
  }
  dg.tail_estimate = te;
  double tmax = 0.0;
  for (const double t : times) tmax = std::max(tmax, t);
  dg.coherence_amplification = coh.active ? std::exp(2.0 * h * tmax) : 1.0;
  out.diag = dg;
  return out;
}

StationaryResult stationary_reduced(const DensityOfStates& dos, double s,
                                    double v, double E,
                                    const ReducedState& rho0, double eta,
                                    double tol) {
  if (!(v > 0.0))
    throw std::invalid_argument(
        "stationary_reduced: positive coupling required");
  try {
    rho0.validate(1e-9);
  } catch (const std::exception& e) {
    throw std::invalid_argument(
        std::string("stationary_reduced: invalid rho0: ") + e.what());
  }
  const Scales sc = estimate_scales(dos, s, v, eta, tol);
  const double h = sc.h;
  const double wid = kPi * v * v * sc.peak;
  const double step = std::max(wid, 4.0 * h) / 12.0;

  double q[2] = {0.0, 0.0};
  double pq[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
  double peak_cond = 0.0;

  const auto column = [&](double lam, double wj) {
    const BoundaryResolvent b = boundary_resolvent(dos, s, v, lam, h, tol);
    const double nup = b.nu(0), num = b.nu(1);
    const double nsum = nup + num;
    const double om0 = nsum > 0.0 ? nup / nsum : 0.5;
    const double cond[2] = {conditional_density_at(E, 0, s, v, b),
                            conditional_density_at(E, 1, s, v, b)};
    peak_cond = std::max(peak_cond, cond[0] + cond[1]);
    for (int d = 0; d < 2; ++d) {
      q[d] += wj * cond[d];
      pq[0][d] += wj * om0 * cond[d];
      pq[1][d] += wj * (1.0 - om0) * cond[d];
    }
  };
  const auto probe = [&](double lam) {
    const BoundaryResolvent b = boundary_resolvent(dos, s, v, lam, h, tol);
    return conditional_density_at(E, 0, s, v, b) +
           conditional_density_at(E, 1, s, v, b);
  };
  const auto block = [&](long a, long b) {
    for (long j = a; j <= b; ++j) {
      const bool edge = (j == a || j == b);
      const double wj =
          (step / 3.0) * (edge ? 1.0 : (((j - a) % 2) ? 4.0 : 2.0));
      column(E + step * static_cast<double>(j), wj);
    }
  };

  long J0 = static_cast<long>(std::ceil((std::abs(s) + 16.0 * wid) / step));
  J0 = ((J0 + 15) / 16) * 16;
  block(-J0, J0);
  long jlo = -J0, jhi = J0;
  const int cap = 600;
  int blo = 0, bhi = 0;
  while (blo < cap && probe(E + step * static_cast<double>(jlo)) >
                          1e-9 * peak_cond) {
    block(jlo - 16, jlo);
    jlo -= 16;
    ++blo;
  }
  while (bhi < cap && probe(E + step * static_cast<double>(jhi)) >
                          1e-9 * peak_cond) {
    block(jhi, jhi + 16);
    jhi += 16;
    ++bhi;
  }

  StationaryResult out;
  double pm[2][2];
  for (int d = 0; d < 2; ++d)
    for (int a = 0; a < 2; ++a)
      pm[a][d] = q[d] > 0.0 ? clamp01(pq[a][d] / q[d]) : 0.5;
  for (int a = 0; a < 2; ++a)
    for (int d = 0; d < 2; ++d) out.prob.p[a][d] = pm[a][d];
  out.rho = ReducedState::diagonal(
      clamp01(pm[0][0] * rho0.pp + pm[0][1] * rho0.mm),
      clamp01(pm[1][0] * rho0.pp + pm[1][1] * rho0.mm));
  return out;
}

double rho0_dependence_diagnostic(const DensityOfStates& dos, double s,
                                  double v, double eta, double tol) {
  const auto win = dos.mass_window();
  const double pad = std::abs(s) + 2.0 * std::abs(v) + 1.0;
  const double lo = win.first - pad, hi = win.second + pad;
  double step, h;
  if (v > 0.0) {
    const Scales sc = estimate_scales(dos, s, v, eta, tol);
    step = sc.w / 16.0;
    h = sc.h;
  } else {
    step = (hi - lo) / 2000.0;
    h = eta > 0.0 ? eta : std::max(1e-4, step / 4.0);
  }
  long n = static_cast<long>(std::ceil((hi - lo) / step));
  if (n < 2) n = 2;
  if (n % 2) ++n;
  if (n > 200000) n = 200000;
  const double hs = (hi - lo) / static_cast<double>(n);
  std::vector<double> lams(static_cast<std::size_t>(n) + 1);
  for (long i = 0; i <= n; ++i)
    lams[static_cast<std::size_t>(i)] = lo + hs * static_cast<double>(i);
  const SpectralDensities sd = spectral_density(dos, s, v, lams, h, tol);
  double peakn = 0.0;
  for (std::size_t i = 0; i < lams.size(); ++i)
    peakn = std::max(peakn, sd.nu_p[i] + sd.nu_m[i]);
  if (!(peakn > 0.0)) return 0.0;
  double tot = 0.0;
  for (long i = 0; i <= n; ++i) {
    const std::size_t k = static_cast<std::size_t>(i);
    const double den = sd.nu_p[k] + sd.nu_m[k];
    const double f = den > 1e-14 * peakn
                         ? (sd.nu_p[k] - sd.nu_m[k]) *
                               (sd.nu_p[k] - sd.nu_m[k]) / den
                         : 0.0;
    const bool edge = (i == 0 || i == n);
    tot += (hs / 3.0) * (edge ? 1.0 : ((i % 2) ? 4.0 : 2.0)) * f;
  }
  return tot;
}

EvolutionResult flat_regime_closed_form(double A, double s,
                                        const ReducedState& rho0,
                                        const std::vector<double>& times) {
  if (!(A > 0.0))
    throw std::invalid_argument(
        "flat_regime_closed_form: level width A must be positive");
  const double G = 4.0 * A;
  const Complex theta = std::sqrt(Complex(A * A - s * s, 0.0));
  EvolutionResult out;
  out.times = times;
  out.stationary = ReducedState::diagonal(0.5, 0.5);
  for (int a = 0; a < 2; ++a)
    for (int d = 0; d < 2; ++d) out.stationary_prob.p[a][d] = 0.5;
  out.stationary_component = {0.5, 0.5};
  const std::size_t nt = times.size();
  out.regular_component[0].assign(nt, 0.0);
  out.regular_component[1].assign(nt, 0.0);
  out.rho.reserve(nt);
  out.prob.reserve(nt);
  for (std::size_t it = 0; it < nt; ++it) {
    const double t = times[it];
    const double e = std::exp(-G * t);
    ProbMatrix P;
    for (int a = 0; a < 2; ++a)
      for (int d = 0; d < 2; ++d)
        P.p[a][d] = 0.5 + 0.5 * spin_sign(a) * spin_sign(d) * e;
    const double pp = P.p[0][0] * rho0.pp + P.p[0][1] * rho0.mm;
    const double mm = P.p[1][0] * rho0.pp + P.p[1][1] * rho0.mm;
    const Complex x = 2.0 * theta * t;
    Complex ch, shn;
    if (std::abs(x) < 1e-6) {
      ch = 1.0 + 0.5 * x * x;
      shn = t * (1.0 + x * x / 6.0);
    } else {
      ch = std::cosh(x);
      shn = std::sinh(x) / (2.0 * theta);
    }
    const Complex pm =
        std::exp(-2.0 * A * t) *
        (ch * rho0.pm +
         shn * (Complex(0.0, -2.0 * s) * rho0.pm + 2.0 * A * std::conj(rho0.pm)));
    out.rho.push_back(ReducedState::general(pp, mm, pm));
    out.prob.push_back(P);
    out.regular_component[0][it] = pp - 0.5;
    out.regular_component[1][it] = mm - 0.5;
  }
  return out;
}

Complex TwoPointKernel::assembled(double E, int a, int b, int g, int d) const {
  const double v2 = v * v;
  const auto gE = [&](int spin, const Complex& z,
                      const std::array<Complex, 2>& r) {
    return 1.0 / (Complex(E + spin_sign(spin) * s, 0.0) - z - v2 * r[1 - spin]);
  };
  const Complex lad =
      1.0 - v2 * v2 * r2[pair_index(a, d)] * r2[pair_index(1 - a, 1 - d)];
  if (b == a && g == d) return gE(a, z1, r_z1) * gE(d, z2, r_z2) / lad;
  if (b == 1 - a && g == 1 - d)
    return gE(1 - a, z1, r_z1) * gE(1 - d, z2, r_z2) * v2 *
           r2[pair_index(a, d)] / lad;
  return Complex(0.0, 0.0);
}

TwoPointKernel two_point_scalar(const DensityOfStates& dos, double s, double v,
                                Complex z1, Complex z2, double tol) {
  if (z1.imag() == 0.0 || z2.imag() == 0.0)
    throw std::invalid_argument(
        "two_point_scalar: arguments must lie off the real axis");
  TwoPointKernel k;
  k.z1 = z1;
  k.z2 = z2;
  k.s = s;
  k.v = v;
  const ResolventPair p1 = solve_pair(dos, s, v, z1, tol);
  const ResolventPair p2 = solve_pair(dos, s, v, z2, tol);
  k.r_z1 = {p1.rp, p1.rm};
  k.r_z2 = {p2.rp, p2.rm};
  double mind = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 2; ++a)
    for (int d = 0; d < 2; ++d) {
      const double ds = s * (spin_sign(d) - spin_sign(a));
      const Complex D =
          z1 - z2 + ds + v * v * (k.r_z1[1 - a] - k.r_z2[1 - d]);
      k.denom[pair_index(a, d)] = D;
      k.r2[pair_index(a, d)] = (k.r_z1[a] - k.r_z2[d]) / D;
      mind = std::min(mind, std::abs(D));
    }
  k.min_denom = mind;
  k.flagged = mind < 1e-9 * std::max({1.0, std::abs(z1), std::abs(z2)});
  return k;
}

TwoPointKernel band_two_point(const BandKernel& kernel,
                              const SelfEnergyField& field, std::size_t iz1,
                              std::size_t iz2) {
  if (iz1 >= field.zs.size() || iz2 >= field.zs.size())
    throw std::invalid_argument("band_two_point: argument index out of range");
  const std::size_t n = field.Es.size();
  if (n == 0)
    throw std::invalid_argument("band_two_point: empty level grid");
  TwoPointKernel k;
  k.z1 = field.zs[iz1];
  k.z2 = field.zs[iz2];
  k.s = field.s;
  k.v = field.v;
  k.nodes = field.Es;
  const double v2 = field.v * field.v;
  using Mat = Eigen::MatrixXcd;
  using Vec = Eigen::VectorXcd;
  const auto ge_line = [&](int a, std::size_t iz) {
    // level amplitude with the opposite-index self-energy in the denominator
    const std::vector<Complex>& dother =
        (a == 0) ? field.delta_m[iz] : field.delta_p[iz];
    const double sa = spin_sign(a) * field.s;
    Vec g(n);
    for (std::size_t j = 0; j < n; ++j)
      g(static_cast<Eigen::Index>(j)) =
          1.0 / (field.Es[j] + sa - field.zs[iz] - dother[j]);
    return g;
  };
  const std::array<Vec, 2> g1{ge_line(0, iz1), ge_line(1, iz1)};
  const std::array<Vec, 2> g2{ge_line(0, iz2), ge_line(1, iz2)};
  Eigen::MatrixXd F(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      F(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          kernel.f(field.Es[i], field.Es[j]);
  const auto build = [&](int a, int d) {
    const Vec wq =
        g1[static_cast<std::size_t>(a)].cwiseProduct(
            g2[static_cast<std::size_t>(d)]) *
        (v2 / static_cast<double>(n));
    Mat S(n, n);
    for (std::size_t j = 0; j < n; ++j)
      S.col(static_cast<Eigen::Index>(j)) =
          F.col(static_cast<Eigen::Index>(j)).cast<Complex>() *
          wq(static_cast<Eigen::Index>(j));
    return S;
  };
  bool nearsing = false;
  for (int a = 0; a < 2; ++a)
    for (int d = 0; d < 2; ++d) {
      const int q = pair_index(a, d);
      const Mat S = build(a, d);
      const Mat S2 = build(1 - a, 1 - d);
      const Vec sl = S.rowwise().sum();
      Mat M = -S2 * S;
      M.diagonal().array() += 1.0;
      const Eigen::PartialPivLU<Mat> lu(M);
      const Vec res = lu.solve(sl);
      // smallest singular value by inverse power iterations
      Vec x = Vec::Ones(static_cast<Eigen::Index>(n));
      x /= x.norm();
      double inv2 = 0.0;
      for (int it = 0; it < 12; ++it) {
        Vec y = lu.solve(x);
        Vec zv = lu.adjoint().solve(y);
        inv2 = zv.norm();
        if (inv2 <= 0.0) break;
        x = zv / inv2;
      }
      const double smin = inv2 > 0.0 ? 1.0 / std::sqrt(inv2) : 0.0;
      k.s_line[q].assign(sl.data(), sl.data() + n);
      k.resolved[q].assign(res.data(), res.data() + n);
      k.min_singular[q] = smin;
      if (smin < 1e-10) nearsing = true;
    }
  k.near_singular = nearsing;
  return k;
}

}  // namespace rmx
