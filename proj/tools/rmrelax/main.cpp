// main.cpp: rmrelax command line driver for runs, comparisons, and reports.
// SPDX-License-Identifier: Apache-2.0
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rmx/compare.hpp"
#include "rmx/config.hpp"
#include "rmx/dos.hpp"
#include "rmx/dynamics.hpp"
#include "rmx/io.hpp"
#include "rmx/mc.hpp"
#include "rmx/resolvent.hpp"
#include "rmx/state.hpp"
#include "rmx/vanhove.hpp"

namespace {

constexpr const char* kVersion = "1.0.0";

// Exit codes: 0 success / comparison PASS, 1 comparison FAIL, 2 error.
constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitError = 2;

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string fmt_int(long long x) { return std::to_string(x); }

/// Shared run options; seed and out-directory overrides come from flags.
struct RunArgs {
  std::vector<std::string> configs;
  std::string out_override;
  long long seed_override = -1;
  int workers = 0;  // 0 = hardware concurrency
};

int effective_workers(int requested) {
  if (requested > 0) return requested;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

/// Loads one config file and applies the command line overrides.
rmx::ConfigMap load_config(const std::string& path, const RunArgs& args) {
  rmx::ConfigMap m = rmx::parse_config_file(path);
  if (!args.out_override.empty()) m["out.dir"] = args.out_override;
  if (args.seed_override >= 0)
    m["engine.mc.seed"] = std::to_string(args.seed_override);
  return m;
}

std::string out_dir_of(const rmx::ConfigMap& m) {
  return rmx::get_string(m, "out.dir", ".");
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    throw std::runtime_error("cannot create output directory '" + dir +
                             "': " + ec.message());
}

/// Axis under `prefix`: explicit `.values` list or `.start/.stop/.count`.
/// Strictly increasing; any sign (energies may be negative).
std::vector<double> parse_axis(const rmx::ConfigMap& m,
                               const std::string& prefix) {
  std::vector<double> out;
  if (m.count(prefix + ".values")) {
    out = rmx::parse_double_list(rmx::require_string(m, prefix + ".values"),
                                 prefix + ".values");
  } else {
    const double start = rmx::require_double(m, prefix + ".start");
    const double stop = rmx::require_double(m, prefix + ".stop");
    const long count = rmx::require_int(m, prefix + ".count");
    if (count < 1) throw rmx::ConfigError(prefix + ".count: must be >= 1");
    if (count > 1 && !(stop > start))
      throw rmx::ConfigError(prefix + ".stop: must be > " + prefix + ".start");
    for (long i = 0; i < count; ++i)
      out.push_back(count == 1
                        ? start
                        : start + (stop - start) * static_cast<double>(i) /
                              static_cast<double>(count - 1));
  }
  for (std::size_t i = 0; i + 1 < out.size(); ++i)
    if (!(out[i] < out[i + 1]))
      throw rmx::ConfigError(prefix + ": values must be strictly increasing");
  return out;
}

class WallTimer {
 public:
  WallTimer() : start_(std::chrono::steady_clock::now()) {}
  long long ms() const {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

using RunMeta = std::map<std::string, std::string>;

void finish_manifest(const rmx::ConfigMap& cfg, const std::string& dir,
                     const std::string& command, const WallTimer& timer,
                     const std::vector<std::string>& outputs, RunMeta run) {
  run["command"] = command;
  run["tool_version"] = kVersion;
  run["wall_ms"] = fmt_int(timer.ms());
  std::string joined;
  for (const auto& f : outputs) {
    if (!joined.empty()) joined += ";";
    joined += f;
  }
  run["outputs"] = joined;
  rmx::write_manifest(dir + "/manifest.json", cfg, run);
}

// ---------------------------------------------------------------------------
// dos: tabulate the level density and, on request, its rate function.

int cmd_dos_one(const rmx::ConfigMap& cfg, int) {
  const WallTimer timer;
  const rmx::DensityOfStates dos = rmx::dos_from_config(cfg, "model.dos");
  const std::vector<double> energies = parse_axis(cfg, "grid");
  const std::string dir = out_dir_of(cfg);
  ensure_dir(dir);

  rmx::Table table;
  table.columns = {"E", "nu0"};
  for (const double e : energies) table.add_row({e, dos.eval(e)});
  rmx::write_table_csv(dir + "/dos.csv", table);
  std::vector<std::string> outputs = {"dos.csv"};

  RunMeta run;
  if (cfg.count("rate.count")) {
    const int J = static_cast<int>(rmx::require_int(cfg, "rate.count"));
    const std::vector<double> es = parse_axis(cfg, "rate.e");
    rmx::Table rate;
    rate.columns = {"e", "sJ", "beta"};
    for (const double e : es) {
      const rmx::ThermoPoint p = dos.rate_function(J, e);
      rate.add_row({e, p.sJ, p.beta});
    }
    rmx::write_table_csv(dir + "/rate.csv", rate);
    outputs.push_back("rate.csv");
    run["rate_count"] = fmt_int(J);
  }
  finish_manifest(cfg, dir, "dos", timer, outputs, std::move(run));
  return kExitPass;
}

// ---------------------------------------------------------------------------
// spectral: boundary densities on a lambda grid, plus an optional banded
// self-energy solve on the quantile level grid.

int cmd_spectral_one(const rmx::ConfigMap& cfg, int) {
  const WallTimer timer;
  const rmx::DensityOfStates dos = rmx::dos_from_config(cfg, "model.dos");
  const double s = rmx::get_double(cfg, "model.s", 0.0);
  const double v = rmx::require_double(cfg, "model.v");
  const double tol = rmx::get_double(cfg, "spectral.tolerance", 1e-10);
  const std::string dir = out_dir_of(cfg);
  ensure_dir(dir);
  std::vector<std::string> outputs;
  RunMeta run;

  if (cfg.count("spectral.lambda.values") ||
      cfg.count("spectral.lambda.start")) {
    const std::vector<double> lambdas = parse_axis(cfg, "spectral.lambda");
    const auto window = dos.mass_window();
    const double span = window.second - window.first + 2.0 * std::abs(s) +
                        4.0 * std::abs(v) + 1.0;
    const double eta = rmx::get_double(cfg, "spectral.eta", 1e-3 * span);
    const rmx::SpectralDensities sd =
        rmx::spectral_density(dos, s, v, lambdas, eta, tol);
    rmx::Table table;
    table.columns = {"lambda", "nu_plus", "nu_minus", "omega_plus",
                     "flag_singular"};
    for (std::size_t i = 0; i < sd.lambda.size(); ++i)
      table.add_row({sd.lambda[i], sd.nu_p[i], sd.nu_m[i], sd.omega_p[i],
                     static_cast<double>(sd.flag_singular[i])});
    rmx::write_table_csv(dir + "/spectral.csv", table);
    outputs.push_back("spectral.csv");
    run["spectral_eta"] = fmt(eta);
  }

  if (cfg.count("selfenergy.n")) {
    const long n = rmx::require_int(cfg, "selfenergy.n");
    if (n < 2) throw rmx::ConfigError("selfenergy.n: must be >= 2");
    const double w0 = rmx::require_double(cfg, "model.band.w0");
    const double b = rmx::require_double(cfg, "model.band.b");
    if (!(w0 > 0.0)) throw rmx::ConfigError("model.band.w0: must be > 0");
    if (!(b > 0.0)) throw rmx::ConfigError("model.band.b: must be > 0");
    const double width = rmx::get_double(cfg, "selfenergy.width", b);
    const auto z_re = rmx::parse_double_list(
        rmx::require_string(cfg, "selfenergy.z_re"), "selfenergy.z_re");
    const auto z_im = rmx::parse_double_list(
        rmx::require_string(cfg, "selfenergy.z_im"), "selfenergy.z_im");
    if (z_re.size() != z_im.size())
      throw rmx::ConfigError("selfenergy.z_im: length differs from z_re");
    std::vector<rmx::Complex> zs;
    for (std::size_t i = 0; i < z_re.size(); ++i)
      zs.emplace_back(z_re[i], z_im[i]);
    const long stride = rmx::get_int(cfg, "selfenergy.stride", 1);
    if (stride < 1) throw rmx::ConfigError("selfenergy.stride: must be >= 1");

    rmx::BandKernel kernel;
    kernel.width = width;
    kernel.f = [w0, b](double x, double y) {
      const double d = (x - y) / b;
      return w0 / (1.0 + d * d);
    };
    const std::vector<double> Es =
        dos.quantiles(static_cast<std::size_t>(n));
    const double setol = rmx::get_double(cfg, "selfenergy.tolerance", 1e-12);
    const rmx::SelfEnergyField field =
        rmx::solve_self_energy(dos, s, v, kernel, Es, zs, setol);

    rmx::Table table;
    table.columns = {"E",          "lambda",     "re_delta_p",
                     "im_delta_p", "re_delta_m", "im_delta_m"};
    for (std::size_t zi = 0; zi < zs.size(); ++zi)
      for (std::size_t ei = 0; ei < Es.size();
           ei += static_cast<std::size_t>(stride))
        table.add_row({Es[ei], zs[zi].real(), field.delta_p[zi][ei].real(),
                       field.delta_p[zi][ei].imag(),
                       field.delta_m[zi][ei].real(),
                       field.delta_m[zi][ei].imag()});
    rmx::write_table_csv(dir + "/selfenergy.csv", table);
    outputs.push_back("selfenergy.csv");
    run["selfenergy_n"] = fmt_int(n);
    run["selfenergy_residual"] = fmt(field.residual);
    run["selfenergy_iterations"] = fmt_int(field.iterations);
    std::string zlist;
    for (const auto& z : zs) {
      if (!zlist.empty()) zlist += ";";
      zlist += fmt(z.real()) + "+" + fmt(z.imag()) + "i";
    }
    run["selfenergy_z"] = zlist;
  }

  if (outputs.empty())
    throw rmx::ConfigError(
        "spectral.lambda: no spectral.lambda.* grid and no selfenergy.n "
        "block; nothing to compute");
  finish_manifest(cfg, dir, "spectral", timer, outputs, std::move(run));
  return kExitPass;
}

// ---------------------------------------------------------------------------
// evolve: infinite-reservoir analytic dynamics.

int cmd_evolve_one(const rmx::ConfigMap& cfg, int) {
  const WallTimer timer;
  const rmx::ExperimentConfig xc = rmx::ExperimentConfig::build(cfg);
  if (xc.engine != rmx::EngineKind::Analytic)
    throw rmx::ConfigError("engine: evolve requires engine = analytic");
  ensure_dir(xc.out_dir);

  rmx::EvolveOptions opt;
  opt.eta = rmx::get_double(cfg, "evolve.eta", 0.0);
  opt.tolerance = rmx::get_double(cfg, "evolve.tolerance", 1e-10);
  opt.tail_target = rmx::get_double(cfg, "evolve.tail_target", 1e-4);
  opt.max_window_blocks = static_cast<int>(
      rmx::get_int(cfg, "evolve.max_window_blocks", opt.max_window_blocks));
  opt.max_tail_blocks = static_cast<int>(
      rmx::get_int(cfg, "evolve.max_tail_blocks", opt.max_tail_blocks));
  opt.with_coherence = rmx::get_int(cfg, "evolve.coherence", 1) != 0;

  const rmx::EvolutionResult res = rmx::evolve_analytic(
      xc.dos, xc.s, xc.v, xc.energy, xc.rho0, xc.grid, opt);

  rmx::Table traj;
  traj.columns = {"t",    "rho_pp", "rho_mm", "rho_pm_re", "rho_pm_im",
                  "p_pp", "p_pm",   "p_mp",   "p_mm"};
  for (std::size_t i = 0; i < res.times.size(); ++i) {
    const auto row = rmx::trajectory_row(res.rho[i], res.prob[i]);
    std::vector<double> r = {res.times[i]};
    r.insert(r.end(), row.begin(), row.end());
    traj.add_row(r);
  }
  rmx::write_table_csv(xc.out_dir + "/trajectory.csv", traj);

  rmx::Table decomp;
  decomp.columns = {"t", "stationary_pp", "regular_pp", "stationary_mm",
                    "regular_mm"};
  for (std::size_t i = 0; i < res.times.size(); ++i)
    decomp.add_row({res.times[i], res.stationary_component[0],
                    res.regular_component[0][i], res.stationary_component[1],
                    res.regular_component[1][i]});
  rmx::write_table_csv(xc.out_dir + "/decomposition.csv", decomp);

  RunMeta run;
  run["eta"] = fmt(res.diag.eta);
  run["width"] = fmt(res.diag.width);
  run["u_max"] = fmt(res.diag.u_max);
  run["tail_estimate"] = fmt(res.diag.tail_estimate);
  run["resonance_cells"] = fmt_int(static_cast<long long>(
      res.diag.resonance_cells));
  run["hermiticity_residual"] = fmt(res.diag.hermiticity_residual);
  run["column_sum_residual"] = fmt(res.diag.column_sum_residual);
  run["stationary_pp"] = fmt(res.stationary.pp);
  run["stationary_mm"] = fmt(res.stationary.mm);
  finish_manifest(cfg, xc.out_dir, "evolve", timer,
                  {"trajectory.csv", "decomposition.csv"}, std::move(run));
  return kExitPass;
}

// ---------------------------------------------------------------------------
// mc: finite-n ensemble runs.

int cmd_mc_one(const rmx::ConfigMap& cfg, int workers) {
  const WallTimer timer;
  const rmx::ExperimentConfig xc = rmx::ExperimentConfig::build(cfg);
  if (xc.engine != rmx::EngineKind::Mc)
    throw rmx::ConfigError("engine: mc requires engine = mc");
  ensure_dir(xc.out_dir);

  rmx::EnsembleModel model;
  model.dos = xc.dos;
  model.s = xc.s;
  model.n = static_cast<std::size_t>(xc.mc_n);
  model.energy = xc.energy;
  model.beta = xc.beta.value_or(0.0);
  model.rho0 = xc.rho0;
  model.reservoir = xc.mc_reservoir == rmx::ReservoirInit::PureLevel
                        ? rmx::InitialState::Kind::PureLevel
                        : rmx::InitialState::Kind::Canonical;
  const std::string interaction =
      rmx::get_string(cfg, "engine.mc.interaction", "goe");
  if (interaction == "goe") {
    model.spec = rmx::InteractionSpec::goe(xc.v);
  } else if (interaction == "banded") {
    const double w0 = rmx::require_double(cfg, "model.band.w0");
    const double b = rmx::require_double(cfg, "model.band.b");
    model.spec = rmx::InteractionSpec::banded(xc.v, [w0, b](double x,
                                                            double y) {
      const double d = (x - y) / b;
      return w0 / (1.0 + d * d);
    });
  } else {
    throw rmx::ConfigError("engine.mc.interaction: unknown value '" +
                           interaction + "'");
  }

  const rmx::EnsembleEstimate est =
      rmx::mc_average(model, static_cast<std::size_t>(xc.mc_realizations),
                      xc.mc_seed, xc.grid, workers);

  rmx::Table traj;
  traj.columns = {"t"};
  for (const char* c : rmx::kTrajectoryColumns) traj.columns.push_back(c);
  for (const char* c : rmx::kTrajectoryColumns)
    traj.columns.push_back(std::string(c) + "_stderr");
  for (std::size_t i = 0; i < est.times.size(); ++i) {
    std::vector<double> r = {est.times[i]};
    r.insert(r.end(), est.mean[i].begin(), est.mean[i].end());
    r.insert(r.end(), est.stderr_[i].begin(), est.stderr_[i].end());
    traj.add_row(r);
  }
  rmx::write_table_csv(xc.out_dir + "/trajectory.csv", traj);

  RunMeta run;
  run["n"] = fmt_int(xc.mc_n);
  run["realizations"] = fmt_int(xc.mc_realizations);
  run["master_seed"] = fmt_int(static_cast<long long>(xc.mc_seed));
  run["workers"] = fmt_int(workers);
  finish_manifest(cfg, xc.out_dir, "mc", timer, {"trajectory.csv"},
                  std::move(run));
  return kExitPass;
}

// ---------------------------------------------------------------------------
// vanhove: weak-coupling closed forms (general density or banded kernel).

int cmd_vanhove_one(const rmx::ConfigMap& cfg, int) {
  const WallTimer timer;
  const rmx::ExperimentConfig xc = rmx::ExperimentConfig::build(cfg);
  if (xc.engine != rmx::EngineKind::Vanhove &&
      xc.engine != rmx::EngineKind::Band)
    throw rmx::ConfigError(
        "engine: vanhove requires engine = vanhove or engine = band");
  ensure_dir(xc.out_dir);

  rmx::Table traj;
  traj.columns = {"t",    "rho_pp", "rho_mm", "rho_pm_re",
                  "rho_pm_im", "p_pp", "p_pm", "p_mp",
                  "p_mm", "mode_stationary", "mode_gamma_p", "mode_gamma_m"};
  RunMeta run;

  if (xc.engine == rmx::EngineKind::Vanhove) {
    const rmx::VanHoveTrajectory main =
        rmx::vanhove_reduced(xc.dos, xc.energy, xc.s, xc.rho0, xc.grid);
    // Transition probabilities are the same closed forms started from the
    // two pure levels.
    const auto up = rmx::ReducedState::diagonal(1.0, 0.0);
    const auto down = rmx::ReducedState::diagonal(0.0, 1.0);
    const rmx::VanHoveModes pp =
        rmx::vanhove_modes(xc.dos, xc.energy, xc.s, 0, up);
    const rmx::VanHoveModes mp =
        rmx::vanhove_modes(xc.dos, xc.energy, xc.s, 1, up);
    const rmx::VanHoveModes pm =
        rmx::vanhove_modes(xc.dos, xc.energy, xc.s, 0, down);
    const rmx::VanHoveModes mm =
        rmx::vanhove_modes(xc.dos, xc.energy, xc.s, 1, down);
    for (std::size_t i = 0; i < main.tau.size(); ++i) {
      const double tau = main.tau[i];
      traj.add_row({tau, main.rho[i].pp, main.rho[i].mm, 0.0, 0.0, pp.at(tau),
                    pm.at(tau), mp.at(tau), mm.at(tau), main.modes_p.stationary,
                    main.modes_p.amp_own *
                        std::exp(-main.modes_p.gamma_own * tau),
                    main.modes_p.amp_cross *
                        std::exp(-main.modes_p.gamma_cross * tau)});
    }
    run["gamma_own"] = fmt(main.modes_p.gamma_own);
    run["gamma_cross"] = fmt(main.modes_p.gamma_cross);
    run["stationary_pp"] = fmt(main.modes_p.stationary);
    run["stationary_mm"] = fmt(main.modes_m.stationary);
  } else {
    const double w0 = xc.band_w0;
    const double b = xc.band_b;
    const double d = 2.0 * xc.s / b;
    const double w2s = w0 / (1.0 + d * d);
    const rmx::BandVanHove bv =
        rmx::vanhove_band(w2s, xc.s, *xc.beta, xc.rho0, xc.grid);
    for (std::size_t i = 0; i < bv.trajectory.tau.size(); ++i) {
      const double tau = bv.trajectory.tau[i];
      const auto from_up = bv.system.solve(1.0, 0.0, tau);
      const auto from_down = bv.system.solve(0.0, 1.0, tau);
      traj.add_row({tau, bv.trajectory.rho[i].pp, bv.trajectory.rho[i].mm, 0.0,
                    0.0, from_up.first, from_down.first, from_up.second,
                    from_down.second, bv.trajectory.modes_p.stationary,
                    bv.trajectory.modes_p.amp_own *
                        std::exp(-bv.trajectory.modes_p.gamma_own * tau),
                    0.0});
    }
    run["w2s"] = fmt(w2s);
    run["g_p"] = fmt(bv.system.g_p);
    run["g_m"] = fmt(bv.system.g_m);
    run["relaxation_rate"] = fmt(bv.system.relaxation_rate());
    const auto st = bv.system.stationary();
    run["stationary_pp"] = fmt(st.first);
    run["stationary_mm"] = fmt(st.second);
  }

  rmx::write_table_csv(xc.out_dir + "/trajectory.csv", traj);
  finish_manifest(cfg, xc.out_dir, "vanhove", timer, {"trajectory.csv"},
                  std::move(run));
  return kExitPass;
}

// ---------------------------------------------------------------------------
// Sweep fan-out: one config per run, each in its own directory.

using RunFn = std::function<int(const rmx::ConfigMap&, int)>;

int run_configs(const RunArgs& args, const RunFn& fn) {
  if (args.configs.empty()) {
    std::cerr << "error: --config is required\n";
    return kExitError;
  }
  if (args.configs.size() > 1 && !args.out_override.empty()) {
    std::cerr << "error: --out applies to a single config; sweeps take "
                 "out.dir from each config\n";
    return kExitError;
  }

  std::vector<rmx::ConfigMap> cfgs;
  std::set<std::string> dirs;
  for (const auto& path : args.configs) {
    try {
      cfgs.push_back(load_config(path, args));
    } catch (const std::exception& e) {
      std::cerr << path << ": " << e.what() << "\n";
      return kExitError;
    }
    const std::string dir = out_dir_of(cfgs.back());
    if (!dirs.insert(dir).second) {
      std::cerr << "error: two configs share out.dir '" << dir << "'\n";
      return kExitError;
    }
  }

  const int workers = effective_workers(args.workers);
  if (cfgs.size() == 1) {
    try {
      return fn(cfgs[0], workers);
    } catch (const std::exception& e) {
      std::cerr << args.configs[0] << ": " << e.what() << "\n";
      return kExitError;
    }
  }

  // Pool over configs; each run is single-threaded inside.
  std::atomic<std::size_t> next{0};
  std::atomic<int> worst{kExitPass};
  std::mutex io_mutex;
  const int pool = std::min<int>(workers, static_cast<int>(cfgs.size()));
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(pool));
  for (int w = 0; w < pool; ++w) {
    threads.emplace_back([&]() {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= cfgs.size()) return;
        int code = kExitPass;
        std::string message;
        try {
          code = fn(cfgs[i], 1);
        } catch (const std::exception& e) {
          code = kExitError;
          message = e.what();
        }
        if (code != kExitPass) {
          int cur = worst.load();
          while (cur < code && !worst.compare_exchange_weak(cur, code)) {
          }
        }
        const std::lock_guard<std::mutex> lock(io_mutex);
        if (!message.empty())
          std::cerr << args.configs[i] << ": " << message << "\n";
        else
          std::cout << args.configs[i] << ": done (out.dir "
                    << out_dir_of(cfgs[i]) << ")\n";
      }
    });
  }
  for (auto& t : threads) t.join();
  return worst.load();
}

// ---------------------------------------------------------------------------
// compare / report

int cmd_compare(const std::string& file_a, const std::string& file_b,
                double tolerance, bool stat_allowance, bool interpolate,
                const std::string& out_dir) {
  rmx::Table a, b;
  rmx::ComparisonReport report;
  try {
    a = rmx::read_table_csv(file_a);
    b = rmx::read_table_csv(file_b);
    report = rmx::compare_tables(a, b, tolerance, stat_allowance, interpolate);
  } catch (const std::exception& e) {
    std::cerr << "compare: " << e.what() << "\n";
    return kExitError;
  }
  report.label_a = file_a;
  report.label_b = file_b;
  std::cout << report.summary();
  if (!out_dir.empty()) {
    try {
      ensure_dir(out_dir);
      std::ofstream f(out_dir + "/report.json");
      f << report.to_json() << "\n";
      if (!f) throw std::runtime_error("write failed");
    } catch (const std::exception& e) {
      std::cerr << "compare: cannot write report: " << e.what() << "\n";
      return kExitError;
    }
  }
  return report.pass ? kExitPass : kExitFail;
}

int cmd_report(const std::vector<std::string>& files,
               const std::string& out_dir) {
  nlohmann::json bundle = nlohmann::json::array();
  bool all_pass = true;
  for (const auto& path : files) {
    std::ifstream f(path);
    if (!f) {
      std::cerr << "report: cannot open " << path << "\n";
      return kExitError;
    }
    nlohmann::json j;
    try {
      f >> j;
    } catch (const std::exception& e) {
      std::cerr << "report: " << path << ": " << e.what() << "\n";
      return kExitError;
    }
    if (!j.contains("pass") || !j.contains("columns")) {
      std::cerr << "report: " << path << ": not a comparison report\n";
      return kExitError;
    }
    const bool pass = j["pass"].get<bool>();
    all_pass = all_pass && pass;
    double worst = 0.0;
    std::string worst_col;
    for (const auto& c : j["columns"]) {
      const double d = c["max_abs_diff"].get<double>();
      if (d >= worst) {
        worst = d;
        worst_col = c["name"].get<std::string>();
      }
    }
    std::printf("%s  %-40s max |diff| %.3e (%s)\n", pass ? "PASS" : "FAIL",
                path.c_str(), worst, worst_col.c_str());
    j["source"] = path;
    bundle.push_back(j);
  }
  std::printf("%s overall (%zu report%s)\n", all_pass ? "PASS" : "FAIL",
              files.size(), files.size() == 1 ? "" : "s");
  if (!out_dir.empty()) {
    try {
      ensure_dir(out_dir);
      nlohmann::json summary;
      summary["pass"] = all_pass;
      summary["reports"] = bundle;
      std::ofstream f(out_dir + "/summary.json");
      f << summary.dump(2) << "\n";
      if (!f) throw std::runtime_error("write failed");
    } catch (const std::exception& e) {
      std::cerr << "report: cannot write summary: " << e.what() << "\n";
      return kExitError;
    }
  }
  return all_pass ? kExitPass : kExitFail;
}

void add_run_options(CLI::App* sub, RunArgs* args) {
  sub->add_option("--config", args->configs,
                  "config file (repeat to sweep; each run needs its own "
                  "out.dir)")
      ->required();
  sub->add_option("--out", args->out_override,
                  "output directory override (single config only)");
  sub->add_option("--seed", args->seed_override,
                  "master seed override for mc engines");
  sub->add_option("--workers", args->workers,
                  "worker threads (0 = hardware concurrency)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "rmrelax: relaxation of a two-level system coupled to a random-matrix "
      "reservoir"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  RunArgs dos_args, spectral_args, evolve_args, mc_args, vanhove_args;
  auto* dos_cmd =
      app.add_subcommand("dos", "tabulate the level density / rate function");
  add_run_options(dos_cmd, &dos_args);
  auto* spectral_cmd = app.add_subcommand(
      "spectral", "boundary spectral densities and banded self-energies");
  add_run_options(spectral_cmd, &spectral_args);
  auto* evolve_cmd =
      app.add_subcommand("evolve", "infinite-reservoir analytic dynamics");
  add_run_options(evolve_cmd, &evolve_args);
  auto* mc_cmd = app.add_subcommand("mc", "finite-n ensemble runs");
  add_run_options(mc_cmd, &mc_args);
  auto* vanhove_cmd =
      app.add_subcommand("vanhove", "weak-coupling closed forms");
  add_run_options(vanhove_cmd, &vanhove_args);

  std::string cmp_a, cmp_b, cmp_out;
  double cmp_tolerance = 0.0;
  bool cmp_stat = false, cmp_interp = false;
  auto* compare_cmd =
      app.add_subcommand("compare", "compare two trajectory/table CSV files");
  compare_cmd->add_option("file_a", cmp_a, "first CSV")->required();
  compare_cmd->add_option("file_b", cmp_b, "second CSV")->required();
  compare_cmd->add_option("--tolerance", cmp_tolerance, "absolute tolerance")
      ->required();
  compare_cmd->add_flag("--stat-allowance", cmp_stat,
                        "widen tolerance by 3x the reported standard errors");
  compare_cmd->add_flag("--interpolate", cmp_interp,
                        "resample the second file onto the first file's grid");
  compare_cmd->add_option("--out", cmp_out, "directory for report.json");

  std::vector<std::string> report_files;
  std::string report_out;
  auto* report_cmd =
      app.add_subcommand("report", "bundle comparison reports into a summary");
  report_cmd->add_option("reports", report_files, "report.json files")
      ->required();
  report_cmd->add_option("--out", report_out, "directory for summary.json");

  CLI11_PARSE(app, argc, argv);

  if (dos_cmd->parsed()) return run_configs(dos_args, cmd_dos_one);
  if (spectral_cmd->parsed()) return run_configs(spectral_args, cmd_spectral_one);
  if (evolve_cmd->parsed()) return run_configs(evolve_args, cmd_evolve_one);
  if (mc_cmd->parsed()) return run_configs(mc_args, cmd_mc_one);
  if (vanhove_cmd->parsed()) return run_configs(vanhove_args, cmd_vanhove_one);
  if (compare_cmd->parsed())
    return cmd_compare(cmp_a, cmp_b, cmp_tolerance, cmp_stat, cmp_interp,
                       cmp_out);
  if (report_cmd->parsed()) return cmd_report(report_files, report_out);
  return kExitError;
}
