#ifndef ORTHOMEASURE_SPECTRAL_PROCESS_HPP
#define ORTHOMEASURE_SPECTRAL_PROCESS_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "orthomeasure/integration.hpp"
#include "orthomeasure/stochastic_measure.hpp"

namespace orthomeasure {

enum class SpectrumKind { white, ar1, table };

/**
 * Spectral measure of a centred stationary sequence on [-pi, pi).
 *
 * white: density variance / (2 pi).
 * ar1:   density variance / (2 pi (1 - 2 phi cos(lambda) + phi^2)), variance
 *        being the innovation variance.
 * table: masses on the 2^L dyadic atoms of [-pi, pi), uniform inside each atom.
 */
struct SpectralDensitySpec {
  SpectrumKind kind = SpectrumKind::white;
  double variance = 1.0;
  double phi = 0.0;
  std::vector<double> table;

  static SpectralDensitySpec white(double variance);
  static SpectralDensitySpec ar1(double variance, double phi);
  static SpectralDensitySpec from_table(std::vector<double> masses);

  /// Throws ArgumentError for invalid parameters.
  void validate() const;
  /// Mass of an interval: density at the midpoint times width (exact overlap
  /// sum for tables).
  double interval_mass(const Interval& interval) const;
  /// Control masses on the dyadic atoms of the given level.
  std::vector<double> masses(unsigned level) const;
  ControlMass control() const;
};

/// K paths of X_n for lags n in [-N, N], stored path-major.
class StationaryEnsemble {
 public:
  StationaryEnsemble(std::size_t scenarios, std::size_t max_lag);

  std::size_t scenarios() const noexcept { return scenarios_; }
  std::size_t max_lag() const noexcept { return max_lag_; }
  std::size_t lag_count() const noexcept { return 2 * max_lag_ + 1; }

  Complex at(std::size_t scenario, long lag) const;
  Complex& at(std::size_t scenario, long lag);
  std::span<const Complex> path(std::size_t scenario) const;
  std::span<const Complex> data() const noexcept { return paths_; }

  friend bool operator==(const StationaryEnsemble&, const StationaryEnsemble&) = default;

 private:
  std::size_t index(std::size_t scenario, long lag) const;

  std::size_t scenarios_;
  std::size_t max_lag_;
  std::vector<Complex> paths_;
};

struct SimulationOptions {
  /// Conjugate-pair atoms share conjugated draws, giving real paths.
  bool hermitian = false;
};

/// X_n = sum_j e^{i lambda_j n} Z(atom j) over the 2^level dyadic atoms with
/// midpoints lambda_j, Z the Gaussian measure of `spec`.
StationaryEnsemble simulate_process(const SpectralDensitySpec& spec, unsigned level, std::size_t K,
                                    std::uint64_t seed, std::size_t max_lag,
                                    SimulationOptions options = {});

/// Ensemble average of X_n conj(X_0).
Complex estimate_covariance(const StationaryEnsemble& ensemble, long lag);

/// sum_j e^{i lambda_j n} mass(atom j); requires 2^level >= 8 |n|.
Complex herglotz_covariance(const SpectralDensitySpec& spec, unsigned level, long lag);

struct FilterResult {
  StationaryEnsemble direct;        ///< int e^{i lambda n} g dZ
  StationaryEnsemble via_derived;   ///< int e^{i lambda n} dZ_g with Z_g derived from (Z, g)
  SpectralDensitySpec derived_spec; ///< |g(lambda_j)|^2 mass(atom j)
  double max_path_gap = 0.0;
};

FilterResult filter_process(const SpectralDensitySpec& spec, unsigned level, std::size_t K,
                            std::uint64_t seed, std::size_t max_lag, const Integrand& transfer,
                            SimulationOptions options = {});

}  // namespace orthomeasure

#endif  // ORTHOMEASURE_SPECTRAL_PROCESS_HPP
