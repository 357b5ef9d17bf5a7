#include <cmath>
#include <numbers>

#include <benchmark/benchmark.h>

#include "orthomeasure/orthomeasure.hpp"

using namespace orthomeasure;

namespace {

ControlMass white() {
  return [](const Interval& iv) { return iv.width() / (2 * std::numbers::pi); };
}

SimpleFunction ramp(const AtomAlgebra& algebra) {
  std::vector<Complex> c(algebra.atom_count());
  for (std::size_t j = 0; j < c.size(); ++j) c[j] = {std::cos(0.3 * j), std::sin(0.7 * j)};
  return {algebra, c};
}

}  // namespace

static void BM_GaussianMeasure(benchmark::State& state) {
  const auto algebra = AtomAlgebra::dyadic(static_cast<unsigned>(state.range(0)));
  const auto K = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(gaussian_measure(algebra, white(), K, 1));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(K * algebra.atom_count()));
}
BENCHMARK(BM_GaussianMeasure)->Args({3, 10000})->Args({8, 2000})->Unit(benchmark::kMillisecond);

static void BM_IntegrateSimple(benchmark::State& state) {
  const auto M = gaussian_measure(AtomAlgebra::dyadic(static_cast<unsigned>(state.range(0))),
                                  white(), 2000, 2);
  const auto f = ramp(M.algebra());
  for (auto _ : state) benchmark::DoNotOptimize(integrate_simple(f, M));
}
BENCHMARK(BM_IntegrateSimple)->Arg(3)->Arg(8)->Unit(benchmark::kMicrosecond);

static void BM_ValidateAxioms(benchmark::State& state) {
  const auto M = gaussian_measure(AtomAlgebra::dyadic(static_cast<unsigned>(state.range(0))),
                                  white(), 5000, 3);
  for (auto _ : state) benchmark::DoNotOptimize(validate_axioms(M));
}
BENCHMARK(BM_ValidateAxioms)->Arg(3)->Arg(5)->Unit(benchmark::kMillisecond);

static void BM_IntegrateL2(benchmark::State& state) {
  const auto M = gaussian_measure(AtomAlgebra::dyadic(2), white(), 500, 4);
  const auto f = Integrand::exponential(static_cast<double>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(integrate_l2(f, M, 1e-2, {10, 0, 1}));
}
BENCHMARK(BM_IntegrateL2)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

static void BM_DeriveMeasure(benchmark::State& state) {
  const auto M = gaussian_measure(AtomAlgebra::dyadic(6), white(), 5000, 5);
  const auto g = ramp(M.algebra());
  for (auto _ : state) benchmark::DoNotOptimize(derive_measure(M, g));
}
BENCHMARK(BM_DeriveMeasure)->Unit(benchmark::kMillisecond);

static void BM_SimulateProcess(benchmark::State& state) {
  const auto spec = SpectralDensitySpec::ar1(1.0, 0.5);
  const auto level = static_cast<unsigned>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(simulate_process(spec, level, 2000, 6, 8));
}
BENCHMARK(BM_SimulateProcess)->Arg(6)->Arg(10)->Unit(benchmark::kMillisecond);

static void BM_HerglotzCovariance(benchmark::State& state) {
  const auto spec = SpectralDensitySpec::ar1(1.0, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(herglotz_covariance(spec, 12, 2));
}
BENCHMARK(BM_HerglotzCovariance)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
