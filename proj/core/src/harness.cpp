#include "orthomeasure/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "json.hpp"
#include "orthomeasure/change_of_measure.hpp"
#include "orthomeasure/error.hpp"
#include "orthomeasure/integration.hpp"
#include "orthomeasure/set_system.hpp"
#include "orthomeasure/stochastic_measure.hpp"

namespace orthomeasure {

using nlohmann::json;

// --- enum names -----------------------------------------------------------------------

std::string_view to_string(ScenarioKind kind) noexcept {
  switch (kind) {
    case ScenarioKind::axioms: return "axioms";
    case ScenarioKind::isometry: return "isometry";
    case ScenarioKind::change_of_measure: return "change-of-measure";
    case ScenarioKind::approximation: return "approximation";
    case ScenarioKind::spectral: return "spectral";
    case ScenarioKind::filter: return "filter";
  }
  return "unknown";
}

std::optional<ScenarioKind> parse_scenario_kind(std::string_view text) noexcept {
  for (auto kind : {ScenarioKind::axioms, ScenarioKind::isometry, ScenarioKind::change_of_measure,
                    ScenarioKind::approximation, ScenarioKind::spectral, ScenarioKind::filter})
    if (text == to_string(kind)) return kind;
  return std::nullopt;
}

std::string_view to_string(ReportFormat format) noexcept {
  return format == ReportFormat::json ? "json" : "csv";
}

std::optional<ReportFormat> parse_report_format(std::string_view text) noexcept {
  if (text == "json") return ReportFormat::json;
  if (text == "csv") return ReportFormat::csv;
  return std::nullopt;
}

// --- config parsing -------------------------------------------------------------------

namespace {

std::size_t line_of_offset(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + offset, '\n'));
}

/// Walks the parsed document, remembering the source text for diagnostics.
class ConfigReader {
 public:
  explicit ConfigReader(std::string_view text) : text_(text) {}

  [[noreturn]] void fail(const std::string& field, const std::string& message) const {
    const std::string key = field.substr(field.rfind('.') + 1);
    const std::size_t at = text_.find('"' + key + '"');
    const std::size_t line = at == std::string_view::npos ? 0 : line_of_offset(text_, at);
    throw ConfigError(fmt::format("config line {}, field '{}': {}", line, field, message), line,
                      field);
  }

  void require_object(const json& value, const std::string& field) const {
    if (!value.is_object()) fail(field, "expected an object");
  }

  void only_keys(const json& object, const std::string& prefix,
                 std::initializer_list<std::string_view> allowed) const {
    for (const auto& [key, value] : object.items()) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
        fail(prefix.empty() ? key : prefix + "." + key, "unknown field");
    }
  }

  std::uint64_t unsigned_value(const json& value, const std::string& field) const {
    if (!value.is_number_unsigned()) fail(field, "expected a nonnegative integer");
    return value.get<std::uint64_t>();
  }

  std::size_t positive_size(const json& value, const std::string& field) const {
    const std::uint64_t v = unsigned_value(value, field);
    if (v == 0) fail(field, "must be positive");
    return static_cast<std::size_t>(v);
  }

  double number(const json& value, const std::string& field) const {
    if (!value.is_number()) fail(field, "expected a number");
    const double v = value.get<double>();
    if (!std::isfinite(v)) fail(field, "must be finite");
    return v;
  }

  std::string string(const json& value, const std::string& field) const {
    if (!value.is_string()) fail(field, "expected a string");
    return value.get<std::string>();
  }

  bool boolean(const json& value, const std::string& field) const {
    if (!value.is_boolean()) fail(field, "expected true or false");
    return value.get<bool>();
  }

 private:
  std::string_view text_;
};

void read_sizes(const ConfigReader& r, const json& j, ScenarioSizes& sizes) {
  r.require_object(j, "sizes");
  r.only_keys(j, "sizes",
              {"atoms", "scenarios", "ensemble", "l2_ensemble", "level", "max_lag", "trials"});
  if (j.contains("atoms")) sizes.atoms = r.positive_size(j["atoms"], "sizes.atoms");
  if (j.contains("scenarios")) sizes.scenarios = r.positive_size(j["scenarios"], "sizes.scenarios");
  if (j.contains("ensemble")) sizes.ensemble = r.positive_size(j["ensemble"], "sizes.ensemble");
  if (j.contains("l2_ensemble"))
    sizes.l2_ensemble = r.positive_size(j["l2_ensemble"], "sizes.l2_ensemble");
  if (j.contains("level"))
    sizes.level = static_cast<unsigned>(std::min<std::size_t>(
        r.positive_size(j["level"], "sizes.level"), std::numeric_limits<unsigned>::max()));
  if (j.contains("max_lag")) sizes.max_lag = r.positive_size(j["max_lag"], "sizes.max_lag");
  if (j.contains("trials")) sizes.trials = r.positive_size(j["trials"], "sizes.trials");
}

void read_tolerances(const ConfigReader& r, const json& j, ScenarioTolerances& tol) {
  r.require_object(j, "tolerances");
  r.only_keys(j, "tolerances",
              {"strict", "exact", "relative", "pass_fraction", "orthogonality_clt",
               "covariance_clt", "l2_target", "oracle_relative"});
  const auto read = [&](const char* key, double& slot) {
    if (j.contains(key)) slot = r.number(j[key], std::string("tolerances.") + key);
  };
  read("strict", tol.strict);
  read("exact", tol.exact);
  read("relative", tol.relative);
  read("pass_fraction", tol.pass_fraction);
  read("orthogonality_clt", tol.orthogonality_clt);
  read("covariance_clt", tol.covariance_clt);
  read("l2_target", tol.l2_target);
  read("oracle_relative", tol.oracle_relative);
}

SpectralDensitySpec read_spectrum(const ConfigReader& r, const json& j) {
  r.require_object(j, "spectrum");
  r.only_keys(j, "spectrum", {"kind", "variance", "phi", "masses"});
  const std::string kind = j.contains("kind") ? r.string(j["kind"], "spectrum.kind") : "white";
  const double variance = j.contains("variance") ? r.number(j["variance"], "spectrum.variance") : 1.0;
  try {
    if (kind == "white") return SpectralDensitySpec::white(variance);
    if (kind == "ar1") {
      if (!j.contains("phi")) r.fail("spectrum.phi", "required for kind ar1");
      return SpectralDensitySpec::ar1(variance, r.number(j["phi"], "spectrum.phi"));
    }
    if (kind == "table") {
      if (!j.contains("masses") || !j["masses"].is_array())
        r.fail("spectrum.masses", "kind table needs an array of masses");
      std::vector<double> masses;
      for (const auto& m : j["masses"]) masses.push_back(r.number(m, "spectrum.masses"));
      return SpectralDensitySpec::from_table(std::move(masses));
    }
  } catch (const ArgumentError& e) {
    r.fail("spectrum", e.what());
  }
  r.fail("spectrum.kind", fmt::format("unknown spectrum kind '{}'", kind));
}

}  // namespace

void validate_config(const ScenarioConfig& config) {
  const auto fail = [](const std::string& field, const std::string& message) {
    throw ConfigError(fmt::format("field '{}': {}", field, message), 0, field);
  };
  const ScenarioSizes& s = config.sizes;
  if (s.atoms < 2) fail("sizes.atoms", "need at least 2 atoms");
  if (s.atoms > 63) fail("sizes.atoms", "at most 63 atoms");
  if (s.scenarios < 3) fail("sizes.scenarios", "need at least 3 scenarios");
  if (s.ensemble < 2) fail("sizes.ensemble", "need at least 2 scenarios");
  if (s.l2_ensemble < 2) fail("sizes.l2_ensemble", "need at least 2 scenarios");
  if (s.level < 1 || s.level > 20) fail("sizes.level", "must lie in [1, 20]");
  if (s.trials == 0) fail("sizes.trials", "must be positive");

  const ScenarioTolerances& t = config.tolerances;
  if (!(t.strict >= 0.0)) fail("tolerances.strict", "must be nonnegative");
  const auto positive = [&](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) fail(std::string("tolerances.") + name, "must be positive");
  };
  positive(t.exact, "exact");
  positive(t.relative, "relative");
  positive(t.pass_fraction, "pass_fraction");
  if (t.pass_fraction > 1.0) fail("tolerances.pass_fraction", "must not exceed 1");
  positive(t.orthogonality_clt, "orthogonality_clt");
  positive(t.covariance_clt, "covariance_clt");
  positive(t.l2_target, "l2_target");
  positive(t.oracle_relative, "oracle_relative");

  const bool spectral =
      config.kind == ScenarioKind::spectral || config.kind == ScenarioKind::filter;
  if (spectral && config.mode != Mode::ensemble)
    fail("mode", fmt::format("kind {} runs in ensemble mode only", to_string(config.kind)));
  if (config.hermitian && !spectral)
    fail("hermitian", "only spectral and filter runs take the hermitian option");
  if (!std::isfinite(config.filter_theta)) fail("filter.theta", "must be finite");
  try {
    config.spectrum.validate();
  } catch (const ArgumentError& e) {
    fail("spectrum", e.what());
  }
}

ScenarioConfig parse_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    const std::size_t line = line_of_offset(json_text, e.byte == 0 ? 0 : e.byte - 1);
    throw ConfigError(fmt::format("config line {}: malformed JSON ({})", line, e.what()), line, "");
  }
  const ConfigReader r(json_text);
  if (!doc.is_object()) r.fail("", "top level must be an object");
  r.only_keys(doc, "", {"kind", "mode", "seed", "sizes", "tolerances", "spectrum", "filter",
                        "hermitian", "output", "format"});

  ScenarioConfig config;
  if (!doc.contains("kind")) r.fail("kind", "missing");
  const std::string kind = r.string(doc["kind"], "kind");
  const auto parsed_kind = parse_scenario_kind(kind);
  if (!parsed_kind) r.fail("kind", fmt::format("unknown scenario kind '{}'", kind));
  config.kind = *parsed_kind;

  if (doc.contains("mode")) {
    const std::string mode = r.string(doc["mode"], "mode");
    const auto parsed = parse_mode(mode);
    if (!parsed) r.fail("mode", fmt::format("unknown mode '{}'", mode));
    config.mode = *parsed;
  } else if (config.kind == ScenarioKind::spectral || config.kind == ScenarioKind::filter) {
    config.mode = Mode::ensemble;
  }
  if (doc.contains("seed")) config.seed = r.unsigned_value(doc["seed"], "seed");
  if (doc.contains("sizes")) read_sizes(r, doc["sizes"], config.sizes);
  if (doc.contains("tolerances")) read_tolerances(r, doc["tolerances"], config.tolerances);
  if (doc.contains("spectrum")) config.spectrum = read_spectrum(r, doc["spectrum"]);
  if (doc.contains("filter")) {
    const json& f = doc["filter"];
    r.require_object(f, "filter");
    r.only_keys(f, "filter", {"theta"});
    if (f.contains("theta")) config.filter_theta = r.number(f["theta"], "filter.theta");
  }
  if (doc.contains("hermitian")) config.hermitian = r.boolean(doc["hermitian"], "hermitian");
  if (doc.contains("output")) config.output = r.string(doc["output"], "output");
  if (doc.contains("format")) {
    const std::string format = r.string(doc["format"], "format");
    const auto parsed = parse_report_format(format);
    if (!parsed) r.fail("format", fmt::format("unknown format '{}'", format));
    config.format = *parsed;
  }
  try {
    validate_config(config);
  } catch (const ConfigError& e) {
    r.fail(e.field(), e.what());
  }
  return config;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot open config '{}'", path.string()), 0, "");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

// --- scenario runs ---------------------------------------------------------------------

bool RunReport::passed() const noexcept {
  return std::all_of(checks.begin(), checks.end(), [](const CheckRecord& c) { return c.passed; });
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
using Rng = std::mt19937_64;

class Recorder {
 public:
  explicit Recorder(std::vector<CheckRecord>& out) : out_(out) {}

  void add(std::string name, Complex lhs, Complex rhs, double gap, double tolerance, bool passed) {
    out_.push_back({std::move(name), lhs, rhs, gap, tolerance, passed, {}});
  }
  /// gap <= tolerance
  void compare(std::string name, Complex lhs, Complex rhs, double gap, double tolerance) {
    add(std::move(name), lhs, rhs, gap, tolerance, gap <= tolerance);
  }

  /// Runs a block of checks; a library error becomes one failed record.
  template <class Body>
  void guarded(const std::string& name, double tolerance, Body&& body) {
    try {
      body();
    } catch (const Error& e) {
      out_.push_back({name, {kNaN, kNaN}, {kNaN, kNaN}, kNaN, tolerance, false, e.what()});
    }
  }

 private:
  std::vector<CheckRecord>& out_;
};

Complex random_complex(Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double re = u(rng);
  return {re, u(rng)};
}

SimpleFunction random_simple(Rng& rng, const AtomAlgebra& algebra) {
  std::vector<Complex> coeffs(algebra.atom_count());
  for (auto& c : coeffs) c = random_complex(rng);
  return {algebra, std::move(coeffs)};
}

/// Random finite space: weights, a partition of the scenario indices and its
/// indicator measure.
OrthogonalStochasticMeasure random_indicator_measure(Rng& rng, const ScenarioSizes& sizes) {
  const std::size_t K = std::uniform_int_distribution<std::size_t>(3, sizes.scenarios)(rng);
  const std::size_t atoms =
      std::uniform_int_distribution<std::size_t>(2, std::min(sizes.atoms, K))(rng);
  std::uniform_real_distribution<double> weight(0.05, 1.0);
  std::vector<double> weights(K);
  double total = 0.0;
  for (auto& w : weights) total += (w = weight(rng));
  for (auto& w : weights) w /= total;

  std::vector<std::size_t> order(K);
  for (std::size_t k = 0; k < K; ++k) order[k] = k;
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> cells(atoms);
  std::uniform_int_distribution<std::size_t> pick(0, atoms - 1);
  for (std::size_t i = 0; i < K; ++i) cells[i < atoms ? i : pick(rng)].push_back(order[i]);
  for (auto& cell : cells) std::sort(cell.begin(), cell.end());

  return indicator_measure(ScenarioModel::exact(std::move(weights)),
                           AtomAlgebra::from_cells(K, std::move(cells)));
}

/// Gaussian measure with random control masses on an unlabelled algebra.
OrthogonalStochasticMeasure random_gaussian_measure(Rng& rng, std::size_t atoms, std::size_t K) {
  const AtomAlgebra algebra = AtomAlgebra::abstract(atoms);
  std::uniform_real_distribution<double> mass(0.05, 1.0);
  std::vector<double> masses(atoms);
  for (auto& m : masses) m = mass(rng);
  return gaussian_measure(algebra, StructuralMeasure(algebra, std::move(masses)), K, rng());
}

/// Masks of every set when the algebra is small, else a random sample.
std::vector<std::uint64_t> set_masks(Rng& rng, std::size_t atoms) {
  std::vector<std::uint64_t> masks;
  if (atoms <= 10) {
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << atoms); ++m) masks.push_back(m);
    return masks;
  }
  const std::uint64_t full = atoms >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << atoms) - 1;
  masks = {0, full};
  for (int i = 0; i < 1022; ++i) masks.push_back(rng() & full);
  return masks;
}

void run_axioms(const ScenarioConfig& c, Recorder& rec, Rng& rng) {
  const auto& tol = c.tolerances;
  if (c.mode == Mode::exact) {
    rec.guarded("axioms/indicator", tol.strict, [&] {
      std::size_t failures = 0;
      double worst = 0.0;
      for (std::size_t t = 0; t < c.sizes.trials; ++t) {
        const auto report = validate_axioms(random_indicator_measure(rng, c.sizes),
                                            AxiomTolerance{tol.strict, 0.0});
        worst = std::max({worst, report.empty_set_residual, report.max_orthogonality_residual,
                          report.additivity_gap});
        if (!report.passed()) ++failures;
      }
      rec.add("axioms/indicator", worst, 0.0, worst, tol.strict, failures == 0);
    });
    return;
  }
  rec.guarded("axioms/gaussian", 1.0, [&] {
    std::size_t failures = 0;
    double worst_ratio = 0.0;
    double worst_mass = 0.0;
    Complex worst_pair;
    for (std::size_t t = 0; t < c.sizes.trials; ++t) {
      const AtomAlgebra algebra = AtomAlgebra::abstract(c.sizes.atoms);
      std::uniform_real_distribution<double> mass(0.05, 1.0);
      std::vector<double> control(c.sizes.atoms);
      for (auto& m : control) m = mass(rng);
      const auto measure =
          gaussian_measure(algebra, StructuralMeasure(algebra, control), c.sizes.ensemble, rng());
      const auto report = validate_axioms(measure, AxiomTolerance{0.0, tol.orthogonality_clt});
      if (!report.passed()) ++failures;
      worst_ratio = std::max(worst_ratio, report.max_orthogonality_ratio);
      const auto empirical = structural_measure(measure);
      for (std::size_t j = 0; j < control.size(); ++j) {
        const double rel = std::abs(empirical.atom_mass(j) - control[j]) / control[j];
        if (rel > worst_mass) {
          worst_mass = rel;
          worst_pair = {empirical.atom_mass(j), control[j]};
        }
      }
    }
    // Residual over its CLT threshold; 1 is the boundary.
    rec.add("axioms/gaussian_orthogonality", worst_ratio, 1.0, worst_ratio, 1.0, failures == 0);
    rec.compare("axioms/gaussian_structural_mass", worst_pair.real(), worst_pair.imag(), worst_mass,
                tol.relative);
  });
}

void run_isometry(const ScenarioConfig& c, Recorder& rec, Rng& rng) {
  const auto& tol = c.tolerances;
  if (c.mode == Mode::exact) {
    rec.guarded("isometry/exact", tol.exact, [&] {
      IdentityCheck worst{};
      for (std::size_t t = 0; t < c.sizes.trials; ++t) {
        const auto measure = random_indicator_measure(rng, c.sizes);
        const auto f = random_simple(rng, measure.algebra());
        const auto g = random_simple(rng, measure.algebra());
        const auto check = isometry_check(f, g, measure);
        if (check.gap >= worst.gap) worst = check;
      }
      rec.compare("isometry/exact", worst.lhs, worst.rhs, worst.gap, tol.exact);
    });
    return;
  }
  rec.guarded("isometry/ensemble", tol.pass_fraction, [&] {
    std::size_t passes = 0;
    double worst = 0.0;
    for (std::size_t t = 0; t < c.sizes.trials; ++t) {
      const auto measure = random_gaussian_measure(rng, c.sizes.atoms, c.sizes.ensemble);
      const auto f = random_simple(rng, measure.algebra());
      const auto g = random_simple(rng, measure.algebra());
      const auto check = isometry_check(f, g, measure);
      const auto structural = structural_measure(measure);
      const double scale = l2_norm_simple(f, structural) * l2_norm_simple(g, structural);
      const double rel = scale > 0.0 ? check.gap / scale : check.gap;
      worst = std::max(worst, rel);
      if (rel < tol.relative) ++passes;
    }
    const double fraction = static_cast<double>(passes) / static_cast<double>(c.sizes.trials);
    rec.add("isometry/ensemble_pass_fraction", fraction, tol.pass_fraction,
            std::max(0.0, tol.pass_fraction - fraction), tol.pass_fraction,
            fraction >= tol.pass_fraction);
    rec.add("isometry/ensemble_max_relative_gap", worst, tol.relative, worst, tol.relative,
            fraction >= tol.pass_fraction);
  });
}

void run_change_of_measure_exact(const ScenarioConfig& c, Recorder& rec, Rng& rng) {
  const auto& tol = c.tolerances;
  rec.guarded("change-of-measure/exact", tol.exact, [&] {
    double pathwise = 0.0, structural = 0.0, additivity = 0.0, composition = 0.0;
    bool monotone = true;
    for (std::size_t t = 0; t < c.sizes.trials; ++t) {
      const auto base = random_indicator_measure(rng, c.sizes);
      const AtomAlgebra& algebra = base.algebra();
      const auto f = random_simple(rng, algebra);
      const auto g = random_simple(rng, algebra);
      const auto bundle = derive_measure(base, g);
      pathwise = std::max(pathwise, verify_change_of_measure(bundle, f).max_scenario_gap);

      for (std::uint64_t mask : set_masks(rng, algebra.atom_count()))
        structural = std::max(structural,
                              structural_identity_check(bundle, algebra.from_mask(mask)).gap);

      std::vector<AlgebraSet> singles;
      for (std::size_t j = 0; j < algebra.atom_count(); ++j) singles.push_back(algebra.atom_set(j));
      double previous = std::numeric_limits<double>::infinity();
      for (std::size_t n = 0; n <= singles.size(); ++n) {
        const auto gap = countable_additivity_gap(bundle, singles, n);
        additivity = std::max(additivity, std::abs(gap.gap - gap.predicted));
        if (gap.gap > previous + tol.exact) monotone = false;
        previous = gap.gap;
      }

      const auto h = random_simple(rng, algebra);
      const auto twice = derive_measure(derive_measure(base, g).derived, h).derived;
      const auto once = derive_measure(base, g * h).derived;
      for (std::size_t j = 0; j < algebra.atom_count(); ++j)
        for (std::size_t k = 0; k < base.model().size(); ++k)
          composition =
              std::max(composition, std::abs(twice.atom_value(j)[k] - once.atom_value(j)[k]));
    }
    rec.compare("change-of-measure/pathwise", pathwise, 0.0, pathwise, tol.exact);
    rec.compare("change-of-measure/structural_identity", structural, 0.0, structural, tol.exact);
    rec.compare("change-of-measure/countable_additivity", additivity, 0.0, additivity, tol.exact);
    rec.add("change-of-measure/additivity_monotone", monotone ? 1.0 : 0.0, 1.0,
            monotone ? 0.0 : 1.0, tol.exact, monotone);
    rec.compare("change-of-measure/composition", composition, 0.0, composition, tol.exact);
  });
}

void run_change_of_measure_ensemble(const ScenarioConfig& c, Recorder& rec, Rng& rng) {
  const auto& tol = c.tolerances;
  rec.guarded("change-of-measure/ensemble", tol.relative, [&] {
    const auto base = random_gaussian_measure(rng, c.sizes.atoms, c.sizes.ensemble);
    const AtomAlgebra& algebra = base.algebra();
    const auto g = random_simple(rng, algebra);
    const auto f = random_simple(rng, algebra);
    const auto bundle = derive_measure(base, g);
    double worst = 0.0;
    MassCheck worst_check{};
    for (std::uint64_t mask : set_masks(rng, algebra.atom_count())) {
      const auto check = structural_identity_check(bundle, algebra.from_mask(mask));
      if (check.rhs <= 0.0) continue;
      const double rel = check.gap / check.rhs;
      if (rel >= worst) {
        worst = rel;
        worst_check = check;
      }
    }
    rec.compare("change-of-measure/structural_identity_relative", worst_check.lhs, worst_check.rhs,
                worst, tol.relative);
    const auto path = verify_change_of_measure(bundle, f);
    rec.compare("change-of-measure/pathwise", path.max_scenario_gap, 0.0, path.max_scenario_gap,
                tol.exact);
  });

  // General densities: f = e^{i lambda}, g = e^{-i lambda} on a coarse dyadic
  // base refined on demand.
  const double l2_tol = 2.0 * tol.l2_target;
  rec.guarded("change-of-measure/l2_exponential", l2_tol, [&] {
    const LevelSchedule schedule{10, 0, 1};
    const auto base = gaussian_measure(AtomAlgebra::dyadic(2), SpectralDensitySpec::white(1.0).control(),
                                       c.sizes.l2_ensemble, rng());
    const auto bundle = derive_measure(base, Integrand::exponential(-1.0), tol.l2_target, schedule);
    const auto check =
        verify_change_of_measure(bundle, Integrand::exponential(1.0), tol.l2_target, schedule);
    rec.compare("change-of-measure/l2_exponential", check.l2_gap, 0.0, check.l2_gap, l2_tol);
  });
}

void run_approximation(const ScenarioConfig& c, Recorder& rec, Rng& rng) {
  const auto& tol = c.tolerances;
  // B_n = [2^-(n+1), 2^-n) inside [0, 1/2); the n-th algebra splits off B_n.
  for (int e = 1; e <= 6; ++e) {
    const double eps = std::pow(10.0, -e);
    const std::string name = fmt::format("approximation/geometric_eps_1e-{}", e);
    rec.guarded(name, 0.0, [&] {
      std::size_t n = 0;
      const SetStream stream = [&n]() -> std::optional<AlgebraSet> {
        ++n;
        if (n > 1000) return std::nullopt;
        std::vector<Interval> atoms{{0.0, std::ldexp(1.0, -static_cast<int>(n) - 1)}};
        for (std::size_t m = n; m >= 1; --m)
          atoms.push_back({std::ldexp(1.0, -static_cast<int>(m) - 1),
                           std::ldexp(1.0, -static_cast<int>(m))});
        const AtomAlgebra algebra = AtomAlgebra::from_intervals(std::move(atoms));
        return algebra.atom_set(1);
      };
      const SetMass lebesgue = [](const AlgebraSet& set) {
        double sum = 0.0;
        for (std::size_t j : set.atoms()) sum += set.algebra().interval(j).width();
        return sum;
      };
      const auto result = approximate_countable_union(stream, lebesgue, eps);
      const double expected = std::ceil(std::log2(1.0 / eps)) - 1.0;
      const double terms = static_cast<double>(result.terms);
      rec.add(name + "/terms", terms, expected, std::abs(terms - expected), 0.0, terms == expected);
      rec.add(name + "/residual", result.residual, eps, result.residual, eps,
              result.residual < eps);
    });
  }

  rec.guarded("approximation/finite_targets", tol.strict, [&] {
    double worst = 0.0;
    bool all_equal = true;
    for (std::size_t t = 0; t < c.sizes.trials; ++t) {
      const auto measure = random_indicator_measure(rng, c.sizes);
      const auto structural = structural_measure(measure);
      const SetMass mass = [&](const AlgebraSet& set) { return structural.mass(set); };
      for (std::uint64_t m : set_masks(rng, measure.algebra().atom_count())) {
        const AlgebraSet target = measure.algebra().from_mask(m);
        const auto result = approximate_algebra_set(target, mass, tol.exact);
        worst = std::max(worst, structural.mass(result.set ^ target));
        all_equal = all_equal && result.set == target;
      }
    }
    rec.add("approximation/finite_targets", worst, 0.0, worst, tol.strict,
            worst <= tol.strict && all_equal);
  });
}

/// Estimate of the midpoint quadrature error at `level`: distance to the next level.
double quadrature_bound(const SpectralDensitySpec& spec, unsigned level, long lag) {
  return std::abs(herglotz_covariance(spec, level, lag) - herglotz_covariance(spec, level + 1, lag));
}

void covariance_rows(const std::string& prefix, const StationaryEnsemble& ensemble,
                     const SpectralDensitySpec& spec, const ScenarioConfig& c, Recorder& rec) {
  const auto& tol = c.tolerances;
  const double K = static_cast<double>(ensemble.scenarios());
  const Complex c0 = estimate_covariance(ensemble, 0);
  const double noise = tol.covariance_clt * std::abs(c0) / std::sqrt(K);
  rec.guarded(prefix + "/cov_0", tol.relative, [&] {
    const Complex h0 = herglotz_covariance(spec, c.sizes.level, 0);
    rec.compare(prefix + "/cov_0", c0, h0, std::abs(c0 - h0) / std::abs(h0), tol.relative);
  });
  for (long n = 1; n <= static_cast<long>(ensemble.max_lag()); ++n) {
    const std::string name = fmt::format("{}/cov_{}", prefix, n);
    rec.guarded(name, noise, [&] {
      const Complex est = estimate_covariance(ensemble, n);
      const Complex h = herglotz_covariance(spec, c.sizes.level, n);
      rec.compare(name, est, h, std::abs(est - h),
                  noise + quadrature_bound(spec, c.sizes.level, n));
    });
  }
  if (c.hermitian) {
    double worst = 0.0;
    const long N = static_cast<long>(ensemble.max_lag());
    for (long n = -N; n <= N; ++n)
      worst = std::max(worst, std::abs(estimate_covariance(ensemble, n).imag()));
    rec.compare(prefix + "/imaginary_parts", worst, 0.0, worst, tol.exact);
  }
}

void run_spectral(const ScenarioConfig& c, Recorder& rec, Rng& rng) {
  const auto& tol = c.tolerances;
  const std::uint64_t seed = rng();
  const StationaryEnsemble ensemble = simulate_process(
      c.spectrum, c.sizes.level, c.sizes.ensemble, seed, c.sizes.max_lag, {c.hermitian});
  covariance_rows("spectral", ensemble, c.spectrum, c, rec);
  if (c.spectrum.kind == SpectrumKind::ar1 && c.sizes.max_lag >= 2) {
    const double phi = c.spectrum.phi;
    const double closed = c.spectrum.variance * phi * phi / (1.0 - phi * phi);
    const Complex est = estimate_covariance(ensemble, 2);
    rec.compare("spectral/ar1_closed_form_lag_2", est, closed,
                std::abs(est - closed) / std::abs(closed), tol.oracle_relative);
  }
}

void run_filter(const ScenarioConfig& c, Recorder& rec, Rng& rng) {
  const auto& tol = c.tolerances;
  const std::uint64_t seed = rng();
  const double theta = c.filter_theta;
  const Integrand transfer{[theta](double lambda) {
    return 1.0 + theta * Complex{std::cos(lambda), -std::sin(lambda)};
  }};
  const FilterResult result = filter_process(c.spectrum, c.sizes.level, c.sizes.ensemble, seed,
                                             c.sizes.max_lag, transfer, {c.hermitian});
  rec.compare("filter/pathwise", result.max_path_gap, 0.0, result.max_path_gap, tol.exact);
  covariance_rows("filter", result.direct, result.derived_spec, c, rec);
  if (c.spectrum.kind == SpectrumKind::white && c.sizes.max_lag >= 1) {
    rec.guarded("filter/ma1_closed_form_lag_1", 0.0, [&] {
      const double closed = theta * c.spectrum.variance;
      const double K = static_cast<double>(c.sizes.ensemble);
      const Complex est = estimate_covariance(result.direct, 1);
      const double bound =
          tol.covariance_clt * std::abs(estimate_covariance(result.direct, 0)) / std::sqrt(K) +
          std::abs(herglotz_covariance(result.derived_spec, c.sizes.level, 1) - closed);
      rec.compare("filter/ma1_closed_form_lag_1", est, closed, std::abs(est - closed), bound);
    });
  }
}

}  // namespace

RunReport run_scenario(const ScenarioConfig& config) {
  validate_config(config);
  const auto start = std::chrono::steady_clock::now();
  RunReport report;
  report.kind = config.kind;
  report.mode = config.mode;
  report.seed = config.seed;
  report.sizes = config.sizes;
  report.tolerances = config.tolerances;
  Recorder rec(report.checks);
  Rng rng(config.seed);
  switch (config.kind) {
    case ScenarioKind::axioms: run_axioms(config, rec, rng); break;
    case ScenarioKind::isometry: run_isometry(config, rec, rng); break;
    case ScenarioKind::change_of_measure:
      if (config.mode == Mode::exact)
        run_change_of_measure_exact(config, rec, rng);
      else
        run_change_of_measure_ensemble(config, rec, rng);
      break;
    case ScenarioKind::approximation: run_approximation(config, rec, rng); break;
    case ScenarioKind::spectral: run_spectral(config, rec, rng); break;
    case ScenarioKind::filter: run_filter(config, rec, rng); break;
  }
  report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

// --- serialization ------------------------------------------------------------------------

namespace {

std::string number(double x) {
  return std::isfinite(x) ? fmt::format("{:.17g}", x) : std::string("null");
}

std::string complex_pair(Complex z) {
  return fmt::format("[{}, {}]", number(z.real()), number(z.imag()));
}

std::string quoted(const std::string& s) { return json(s).dump(); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

std::string csv_number(double x) { return std::isfinite(x) ? fmt::format("{:.17g}", x) : ""; }

}  // namespace

std::string emit_report(const RunReport& report, ReportFormat format) {
  std::string out;
  if (format == ReportFormat::csv) {
    out = "name,lhs_re,lhs_im,rhs_re,rhs_im,gap,tolerance,passed,detail\n";
    for (const auto& c : report.checks)
      out += fmt::format("{},{},{},{},{},{},{},{},{}\n", csv_field(c.name), csv_number(c.lhs.real()),
                         csv_number(c.lhs.imag()), csv_number(c.rhs.real()),
                         csv_number(c.rhs.imag()), csv_number(c.gap), csv_number(c.tolerance),
                         c.passed ? "true" : "false", csv_field(c.detail));
    return out;
  }
  const auto& s = report.sizes;
  const auto& t = report.tolerances;
  out += "{\n";
  out += fmt::format("  \"schema_version\": {},\n", report.schema_version);
  out += fmt::format("  \"kind\": \"{}\",\n", to_string(report.kind));
  out += fmt::format("  \"mode\": \"{}\",\n", to_string(report.mode));
  out += fmt::format("  \"seed\": {},\n", report.seed);
  out += fmt::format(
      "  \"sizes\": {{\"atoms\": {}, \"scenarios\": {}, \"ensemble\": {}, \"l2_ensemble\": {}, "
      "\"level\": {}, \"max_lag\": {}, \"trials\": {}}},\n",
      s.atoms, s.scenarios, s.ensemble, s.l2_ensemble, s.level, s.max_lag, s.trials);
  out += fmt::format(
      "  \"tolerances\": {{\"strict\": {}, \"exact\": {}, \"relative\": {}, \"pass_fraction\": {}, "
      "\"orthogonality_clt\": {}, \"covariance_clt\": {}, \"l2_target\": {}, "
      "\"oracle_relative\": {}}},\n",
      number(t.strict), number(t.exact), number(t.relative), number(t.pass_fraction),
      number(t.orthogonality_clt), number(t.covariance_clt), number(t.l2_target),
      number(t.oracle_relative));
  out += fmt::format("  \"passed\": {},\n", report.passed() ? "true" : "false");
  out += "  \"checks\": [";
  for (std::size_t i = 0; i < report.checks.size(); ++i) {
    const auto& c = report.checks[i];
    out += i == 0 ? "\n" : ",\n";
    out += fmt::format(
        "    {{\"name\": {}, \"lhs\": {}, \"rhs\": {}, \"gap\": {}, \"tolerance\": {}, "
        "\"passed\": {}, \"detail\": {}}}",
        quoted(c.name), complex_pair(c.lhs), complex_pair(c.rhs), number(c.gap),
        number(c.tolerance), c.passed ? "true" : "false", quoted(c.detail));
  }
  out += report.checks.empty() ? "],\n" : "\n  ],\n";
  out += fmt::format("  \"wall_time_seconds\": {}\n", number(report.wall_time_seconds));
  out += "}\n";
  return out;
}

RunReport parse_report(std::string_view json_text) {
  const json doc = json::parse(json_text.begin(), json_text.end());
  const auto real = [](const json& v) {
    return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
  };
  const auto pair = [&](const json& v) { return Complex{real(v.at(0)), real(v.at(1))}; };

  RunReport report;
  report.schema_version = doc.at("schema_version").get<int>();
  const auto kind = parse_scenario_kind(doc.at("kind").get<std::string>());
  const auto mode = parse_mode(doc.at("mode").get<std::string>());
  if (!kind || !mode) throw ArgumentError("report has an unknown kind or mode");
  report.kind = *kind;
  report.mode = *mode;
  report.seed = doc.at("seed").get<std::uint64_t>();
  const json& s = doc.at("sizes");
  report.sizes = {s.at("atoms").get<std::size_t>(),   s.at("scenarios").get<std::size_t>(),
                  s.at("ensemble").get<std::size_t>(), s.at("l2_ensemble").get<std::size_t>(),
                  s.at("level").get<unsigned>(),       s.at("max_lag").get<std::size_t>(),
                  s.at("trials").get<std::size_t>()};
  const json& t = doc.at("tolerances");
  report.tolerances = {real(t.at("strict")),        real(t.at("exact")),
                       real(t.at("relative")),      real(t.at("pass_fraction")),
                       real(t.at("orthogonality_clt")), real(t.at("covariance_clt")),
                       real(t.at("l2_target")),     real(t.at("oracle_relative"))};
  for (const auto& c : doc.at("checks"))
    report.checks.push_back({c.at("name").get<std::string>(), pair(c.at("lhs")), pair(c.at("rhs")),
                             real(c.at("gap")), real(c.at("tolerance")), c.at("passed").get<bool>(),
                             c.at("detail").get<std::string>()});
  report.wall_time_seconds = real(doc.at("wall_time_seconds"));
  return report;
}

}  // namespace orthomeasure
