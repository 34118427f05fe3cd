// Microbenchmarks for the relaxation toolkit hot paths.
// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <complex>
#include <vector>

#include "rmx/dos.hpp"
#include "rmx/dynamics.hpp"
#include "rmx/mc.hpp"
#include "rmx/numerics.hpp"
#include "rmx/resolvent.hpp"
#include "rmx/state.hpp"

namespace {

using rmx::Complex;
using rmx::DensityOfStates;

const DensityOfStates& unit_gaussian() {
  static const auto dos = DensityOfStates::gaussian_convolution(1, 1.0, 0.0);
  return dos;
}

// Dense eigensolve of one realization, the finite-n ensemble hot path.
void BM_EigensolveRealization(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const auto levels = unit_gaussian().quantiles(n);
  const auto spec = rmx::InteractionSpec::goe(0.4);
  const auto w = rmx::sample_interaction(spec, levels, 42u);
  const auto h = rmx::assemble_hamiltonian(0.3, spec, levels, w);
  const std::vector<double> times = {0.0, 1.0};
  const auto init =
      rmx::InitialState::pure_level(rmx::ReducedState::diagonal(1.0, 0.0),
                                    n / 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rmx::evolve_reduced(h, init, times));
  }
  state.SetComplexityN(static_cast<benchmark::IterationCount>(n));
}
BENCHMARK(BM_EigensolveRealization)->Arg(32)->Arg(64)->Arg(128)->Arg(256)
    ->Complexity(benchmark::oNCubed);

// Coupled resolvent fixed point at one complex argument.
void BM_ResolventPair(benchmark::State& state) {
  const Complex z(0.3, 0.05);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        rmx::solve_pair(unit_gaussian(), 0.3, 0.35, z, 1e-12));
  }
}
BENCHMARK(BM_ResolventPair);

// Stieltjes transform evaluation (complex error-function throughput).
void BM_Stieltjes(benchmark::State& state) {
  Complex z(0.1, 0.02);
  for (auto _ : state) {
    benchmark::DoNotOptimize(unit_gaussian().stieltjes(z));
    z += Complex(1e-9, 0.0);  // defeat value caching across iterations
  }
}
BENCHMARK(BM_Stieltjes);

// Oscillatory quadrature kernel on a fixed 801-node panel.
void BM_FilonCos(benchmark::State& state) {
  rmx::UniformSection sec;
  sec.a = 0.5;
  sec.h = 5e-3;
  for (int j = 0; j <= 800; ++j) sec.f.push_back(1.0 / (sec.a + sec.h * j));
  double t = 7.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(rmx::filon_cos(sec, t));
    t += 1e-6;
  }
}
BENCHMARK(BM_FilonCos);

// One full analytic evolution on a short time grid.
void BM_EvolveAnalytic(benchmark::State& state) {
  const auto rho0 =
      rmx::ReducedState::general(0.8, 0.2, Complex(0.1, 0.15));
  const std::vector<double> times = {0.0, 0.5, 1.0, 1.5, 2.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        rmx::evolve_analytic(unit_gaussian(), 0.3, 0.35, 0.0, rho0, times));
  }
}
BENCHMARK(BM_EvolveAnalytic);

// Banded self-energy field solve on n level nodes.
void BM_SelfEnergyField(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const auto dos = DensityOfStates::tabulated({-2.0, 0.0, 2.0},
                                              {0.5, 1.0, 0.5});
  rmx::BandKernel kernel;
  kernel.f = [](double x, double y) {
    const double d = x - y;
    return 1.0 / (1.0 + d * d);
  };
  kernel.width = 1.0;
  const auto Es = dos.quantiles(n);
  const std::vector<Complex> zs = {Complex(0.25, 0.9)};
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        rmx::solve_self_energy(dos, 0.4, 0.3, kernel, Es, zs));
  }
  state.SetComplexityN(static_cast<benchmark::IterationCount>(n));
}
BENCHMARK(BM_SelfEnergyField)->Arg(256)->Arg(512)->Arg(1024);

}  // namespace

BENCHMARK_MAIN();
