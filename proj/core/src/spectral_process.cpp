#include "orthomeasure/spectral_process.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "orthomeasure/change_of_measure.hpp"
#include "orthomeasure/error.hpp"
#include "parallel.hpp"

namespace orthomeasure {

namespace {

constexpr double kPi = std::numbers::pi;

// Scenarios generated per pass; bounds memory at chunk * atoms values.
constexpr std::size_t kChunk = 512;

void check_finite_positive(double x, const char* what) {
  if (!(x > 0.0) || !std::isfinite(x))
    throw ArgumentError(fmt::format("{} must be positive and finite, got {}", what, x));
}

}  // namespace

// --- SpectralDensitySpec ----------------------------------------------------------

SpectralDensitySpec SpectralDensitySpec::white(double variance) {
  SpectralDensitySpec spec{SpectrumKind::white, variance, 0.0, {}};
  spec.validate();
  return spec;
}

SpectralDensitySpec SpectralDensitySpec::ar1(double variance, double phi) {
  SpectralDensitySpec spec{SpectrumKind::ar1, variance, phi, {}};
  spec.validate();
  return spec;
}

SpectralDensitySpec SpectralDensitySpec::from_table(std::vector<double> masses) {
  SpectralDensitySpec spec{SpectrumKind::table, 0.0, 0.0, std::move(masses)};
  spec.validate();
  for (double m : spec.table) spec.variance += m;
  return spec;
}

void SpectralDensitySpec::validate() const {
  switch (kind) {
    case SpectrumKind::white:
      check_finite_positive(variance, "white noise variance");
      return;
    case SpectrumKind::ar1:
      check_finite_positive(variance, "AR(1) innovation variance");
      if (!(std::abs(phi) < 1.0))
        throw ArgumentError(fmt::format("AR(1) coefficient must lie in (-1, 1), got {}", phi));
      return;
    case SpectrumKind::table:
      if (table.empty() || !std::has_single_bit(table.size()) || table.size() > (1u << 24))
        throw ArgumentError(fmt::format(
            "spectral table needs 2^L entries for some L <= 24, got {}", table.size()));
      for (std::size_t j = 0; j < table.size(); ++j)
        if (!(table[j] >= 0.0) || !std::isfinite(table[j]))
          throw ArgumentError(fmt::format("spectral table entry {} is invalid: {}", j, table[j]));
      return;
  }
  throw ArgumentError("unknown spectrum kind");
}

double SpectralDensitySpec::interval_mass(const Interval& interval) const {
  switch (kind) {
    case SpectrumKind::white:
      return variance / (2.0 * kPi) * interval.width();
    case SpectrumKind::ar1: {
      const double c = std::cos(interval.midpoint());
      return variance / (2.0 * kPi * (1.0 - 2.0 * phi * c + phi * phi)) * interval.width();
    }
    case SpectrumKind::table: {
      const double w = 2.0 * kPi / static_cast<double>(table.size());
      double sum = 0.0;
      for (std::size_t t = 0; t < table.size(); ++t) {
        const double lo = -kPi + w * static_cast<double>(t);
        const double overlap = std::min(interval.upper, lo + w) - std::max(interval.lower, lo);
        if (overlap > 0.0) sum += table[t] * std::min(1.0, overlap / w);
      }
      return sum;
    }
  }
  return 0.0;
}

std::vector<double> SpectralDensitySpec::masses(unsigned level) const {
  validate();
  if (kind == SpectrumKind::table && (std::size_t{1} << level) == table.size()) return table;
  const AtomAlgebra algebra = AtomAlgebra::dyadic(level);
  std::vector<double> out(algebra.atom_count());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = interval_mass(algebra.interval(j));
  return out;
}

ControlMass SpectralDensitySpec::control() const {
  validate();
  return [spec = *this](const Interval& interval) { return spec.interval_mass(interval); };
}

// --- StationaryEnsemble -------------------------------------------------------------

StationaryEnsemble::StationaryEnsemble(std::size_t scenarios, std::size_t max_lag)
    : scenarios_(scenarios), max_lag_(max_lag), paths_(scenarios * (2 * max_lag + 1)) {}

std::size_t StationaryEnsemble::index(std::size_t scenario, long lag) const {
  if (scenario >= scenarios_)
    throw ArgumentError(fmt::format("scenario {} out of range ({})", scenario, scenarios_));
  if (static_cast<std::size_t>(std::abs(lag)) > max_lag_)
    throw ArgumentError(fmt::format("lag {} outside [-{}, {}]", lag, max_lag_, max_lag_));
  return scenario * lag_count() + static_cast<std::size_t>(lag + static_cast<long>(max_lag_));
}

Complex StationaryEnsemble::at(std::size_t scenario, long lag) const {
  return paths_[index(scenario, lag)];
}

Complex& StationaryEnsemble::at(std::size_t scenario, long lag) {
  return paths_[index(scenario, lag)];
}

std::span<const Complex> StationaryEnsemble::path(std::size_t scenario) const {
  return std::span<const Complex>(paths_).subspan(index(scenario, 0) - max_lag_, lag_count());
}

// --- simulation ------------------------------------------------------------------------

namespace {

void check_simulation_args(const SpectralDensitySpec& spec, unsigned level, std::size_t K) {
  spec.validate();
  if (level < 1 || level > 20)
    throw ArgumentError(fmt::format("spectral level must lie in [1, 20], got {}", level));
  if (K < 2) throw ArgumentError(fmt::format("ensemble needs K >= 2, got {}", K));
}

/// Midpoint projections of e^{i lambda n} for n = -N..N.
std::vector<SimpleFunction> exponentials(const AtomAlgebra& algebra, std::size_t max_lag) {
  std::vector<SimpleFunction> out;
  out.reserve(2 * max_lag + 1);
  const long N = static_cast<long>(max_lag);
  for (long n = -N; n <= N; ++n)
    out.push_back(project_to_simple(Integrand::exponential(static_cast<double>(n)), algebra, 1));
  return out;
}

GaussianMeasureGenerator spectral_generator(const SpectralDensitySpec& spec, unsigned level,
                                            std::uint64_t seed, SimulationOptions options) {
  return {AtomAlgebra::dyadic(level), spec.control(), seed, GaussianOptions{options.hermitian}};
}

/// Writes the integrals of every integrand against one chunk of scenarios.
void store_chunk(StationaryEnsemble& ensemble, std::size_t first,
                 std::span<const SimpleFunction> integrands,
                 const OrthogonalStochasticMeasure& measure) {
  const long N = static_cast<long>(ensemble.max_lag());
  detail::parallel_for(integrands.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const RandomElement x = integrate_simple(integrands[i], measure);
      const long lag = static_cast<long>(i) - N;
      for (std::size_t k = 0; k < x.size(); ++k) ensemble.at(first + k, lag) = x[k];
    }
  });
}

}  // namespace

StationaryEnsemble simulate_process(const SpectralDensitySpec& spec, unsigned level, std::size_t K,
                                    std::uint64_t seed, std::size_t max_lag,
                                    SimulationOptions options) {
  check_simulation_args(spec, level, K);
  const GaussianMeasureGenerator generator = spectral_generator(spec, level, seed, options);
  const std::vector<SimpleFunction> waves = exponentials(generator.algebra(), max_lag);
  StationaryEnsemble ensemble(K, max_lag);
  for (std::size_t first = 0; first < K; first += kChunk) {
    const std::size_t count = std::min(kChunk, K - first);
    store_chunk(ensemble, first, waves, generator.generate(first, count, 1));
  }
  return ensemble;
}

Complex estimate_covariance(const StationaryEnsemble& ensemble, long lag) {
  if (static_cast<std::size_t>(std::abs(lag)) > ensemble.max_lag())
    throw ArgumentError(fmt::format("lag {} outside [-{}, {}]", lag, ensemble.max_lag(),
                                    ensemble.max_lag()));
  if (ensemble.scenarios() == 0) throw ArgumentError("empty ensemble");
  Complex sum{};
  for (std::size_t k = 0; k < ensemble.scenarios(); ++k)
    sum += ensemble.at(k, lag) * std::conj(ensemble.at(k, 0));
  return sum / static_cast<double>(ensemble.scenarios());
}

Complex herglotz_covariance(const SpectralDensitySpec& spec, unsigned level, long lag) {
  spec.validate();
  if (level > 24) throw ArgumentError(fmt::format("spectral level {} too fine", level));
  const double atoms = std::ldexp(1.0, static_cast<int>(level));
  if (atoms < 8.0 * std::abs(static_cast<double>(lag)))
    throw ResolutionError(fmt::format(
        "level {} does not resolve lag {}: need 2^level >= 8 |n|", level, lag));
  const AtomAlgebra algebra = AtomAlgebra::dyadic(level);
  const std::vector<double> masses = spec.masses(level);
  const SimpleFunction wave =
      project_to_simple(Integrand::exponential(static_cast<double>(lag)), algebra, 1);
  Complex sum{};
  for (std::size_t j = 0; j < masses.size(); ++j) sum += wave.coeff(j) * masses[j];
  return sum;
}

FilterResult filter_process(const SpectralDensitySpec& spec, unsigned level, std::size_t K,
                            std::uint64_t seed, std::size_t max_lag, const Integrand& transfer,
                            SimulationOptions options) {
  check_simulation_args(spec, level, K);
  const GaussianMeasureGenerator generator = spectral_generator(spec, level, seed, options);
  const AtomAlgebra& algebra = generator.algebra();
  const SimpleFunction g = project_to_simple(transfer, algebra, 1);
  const std::vector<SimpleFunction> waves = exponentials(algebra, max_lag);
  std::vector<SimpleFunction> filtered;
  filtered.reserve(waves.size());
  for (const auto& e : waves) filtered.push_back(e * g);

  FilterResult result{StationaryEnsemble(K, max_lag), StationaryEnsemble(K, max_lag),
                      SpectralDensitySpec{}, 0.0};
  for (std::size_t first = 0; first < K; first += kChunk) {
    const std::size_t count = std::min(kChunk, K - first);
    const OrthogonalStochasticMeasure base = generator.generate(first, count, 1);
    store_chunk(result.direct, first, filtered, base);
    store_chunk(result.via_derived, first, waves, derive_measure(base, g).derived);
  }

  const auto direct = result.direct.data();
  const auto derived = result.via_derived.data();
  for (std::size_t i = 0; i < direct.size(); ++i)
    result.max_path_gap = std::max(result.max_path_gap, std::abs(direct[i] - derived[i]));

  std::vector<double> masses = spec.masses(level);
  for (std::size_t j = 0; j < masses.size(); ++j) masses[j] *= std::norm(g.coeff(j));
  result.derived_spec = SpectralDensitySpec::from_table(std::move(masses));
  return result;
}

}  // namespace orthomeasure
