#ifndef ORTHOMEASURE_HARNESS_HPP
#define ORTHOMEASURE_HARNESS_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "orthomeasure/probability.hpp"
#include "orthomeasure/spectral_process.hpp"

namespace orthomeasure {

enum class ScenarioKind { axioms, isometry, change_of_measure, approximation, spectral, filter };
enum class ReportFormat { json, csv };

std::string_view to_string(ScenarioKind kind) noexcept;
std::optional<ScenarioKind> parse_scenario_kind(std::string_view text) noexcept;
std::string_view to_string(ReportFormat format) noexcept;
std::optional<ReportFormat> parse_report_format(std::string_view text) noexcept;

struct ScenarioSizes {
  std::size_t atoms = 8;         ///< maximum atoms per algebra
  std::size_t scenarios = 16;    ///< maximum scenarios of exact spaces
  std::size_t ensemble = 20000;  ///< K for ensemble runs
  std::size_t l2_ensemble = 2000;  ///< K for checks that refine the measure to fine levels
  unsigned level = 10;           ///< dyadic level of spectral runs
  std::size_t max_lag = 8;       ///< N
  std::size_t trials = 100;
};

/// Every threshold a check compares against. Defaults are the documented
/// values in README.md; none are hard-coded in the check logic.
struct ScenarioTolerances {
  double strict = 0.0;             ///< checks allowing no slack (exact axioms, finite targets)
  double exact = 1e-12;            ///< exact-mode identities
  double relative = 0.05;          ///< ensemble relative gaps
  double pass_fraction = 0.95;     ///< share of ensemble isometry trials that must pass
  double orthogonality_clt = 5.0;  ///< axiom threshold factor on sqrt(m_i m_j / K)
  double covariance_clt = 3.0;     ///< covariance threshold factor on cov(0) / sqrt(K)
  double l2_target = 1e-3;         ///< Cauchy target of integrate_l2
  double oracle_relative = 0.10;   ///< closed-form covariance oracles (AR(1) lag 2)
};

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::axioms;
  Mode mode = Mode::exact;
  std::uint64_t seed = 1;
  ScenarioSizes sizes;
  ScenarioTolerances tolerances;
  SpectralDensitySpec spectrum = SpectralDensitySpec::white(1.0);
  double filter_theta = 0.5;  ///< MA(1) transfer 1 + theta e^{-i lambda}
  bool hermitian = false;
  std::string output;         ///< empty: standard output
  ReportFormat format = ReportFormat::json;
};

/// Parses the JSON config schema; throws ConfigError with line and field.
ScenarioConfig parse_config(std::string_view json_text);
/// Range and combination checks shared by the parser and run_scenario (for
/// configs altered after parsing, e.g. by command-line overrides).
void validate_config(const ScenarioConfig& config);
ScenarioConfig load_config(const std::filesystem::path& path);

struct CheckRecord {
  std::string name;
  Complex lhs;
  Complex rhs;
  double gap = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string detail;  ///< error text when the check could not be evaluated
};

inline constexpr int kReportSchemaVersion = 1;

struct RunReport {
  int schema_version = kReportSchemaVersion;
  ScenarioKind kind = ScenarioKind::axioms;
  Mode mode = Mode::exact;
  std::uint64_t seed = 0;
  ScenarioSizes sizes;
  ScenarioTolerances tolerances;
  std::vector<CheckRecord> checks;
  double wall_time_seconds = 0.0;

  bool passed() const noexcept;
};

/// Runs the check suite for config.kind. Check failures and resolution guard
/// violations become failed records; only malformed configs throw.
RunReport run_scenario(const ScenarioConfig& config);

/// Stable field order, floats with 17 significant digits, non-finite as null.
std::string emit_report(const RunReport& report, ReportFormat format);

/// Inverse of emit_report(..., json).
RunReport parse_report(std::string_view json_text);

}  // namespace orthomeasure

#endif  // ORTHOMEASURE_HARNESS_HPP
