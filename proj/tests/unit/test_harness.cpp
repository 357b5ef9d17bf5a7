#include <cmath>
#include <string>

#include "doctest.h"
#include "orthomeasure/error.hpp"
#include "orthomeasure/harness.hpp"

using namespace orthomeasure;

namespace {

ConfigError config_error(std::string_view text) {
  try {
    validate_config(parse_config(text));
  } catch (const ConfigError& e) {
    return e;
  }
  FAIL("config was accepted: " << text);
  return ConfigError("", 0, "");
}

ScenarioConfig small(ScenarioKind kind, Mode mode) {
  ScenarioConfig c;
  c.kind = kind;
  c.mode = mode;
  c.seed = 77;
  c.sizes.atoms = 6;
  c.sizes.scenarios = 12;
  c.sizes.ensemble = 4000;
  c.sizes.l2_ensemble = 300;
  c.sizes.level = 7;
  c.sizes.max_lag = 4;
  c.sizes.trials = 10;
  c.tolerances.relative = 0.10;
  c.tolerances.l2_target = 5e-3;
  c.tolerances.oracle_relative = 0.5;
  return c;
}

}  // namespace

TEST_SUITE("cli_harness") {

TEST_CASE("config parsing") {
  const auto c = parse_config(R"({
    "kind": "spectral",
    "mode": "ensemble",
    "seed": 12345678901234,
    "sizes": {"ensemble": 1000, "level": 9, "max_lag": 3},
    "tolerances": {"covariance_clt": 4.0},
    "spectrum": {"kind": "ar1", "variance": 2.0, "phi": -0.25},
    "hermitian": true,
    "format": "csv"
  })");
  CHECK(c.kind == ScenarioKind::spectral);
  CHECK(c.mode == Mode::ensemble);
  CHECK(c.seed == 12345678901234ull);
  CHECK(c.sizes.ensemble == 1000);
  CHECK(c.sizes.level == 9);
  CHECK(c.sizes.max_lag == 3);
  CHECK(c.sizes.trials == ScenarioSizes{}.trials);
  CHECK(c.tolerances.covariance_clt == 4.0);
  CHECK(c.tolerances.exact == ScenarioTolerances{}.exact);
  CHECK(c.spectrum.kind == SpectrumKind::ar1);
  CHECK(c.spectrum.phi == -0.25);
  CHECK(c.hermitian);
  CHECK(c.format == ReportFormat::csv);
  CHECK_NOTHROW(validate_config(c));
}

TEST_CASE("config errors carry line and field") {
  const auto unknown = config_error("{\n  \"kind\": \"axioms\",\n  \"colour\": 3\n}");
  CHECK(unknown.line() == 3);
  CHECK(unknown.field() == "colour");

  const auto nested = config_error("{\"kind\": \"isometry\",\n\"sizes\": {\n\"trials\": -4}}");
  CHECK(nested.line() == 3);
  CHECK(nested.field() == "sizes.trials");

  const auto kind = config_error(R"({"kind": "wavelets"})");
  CHECK(kind.field() == "kind");

  const auto malformed = config_error("{\n\"kind\": \"axioms\",,\n}");
  CHECK(malformed.line() == 2);

  CHECK(config_error(R"({"kind": "axioms", "sizes": {"atoms": 64}})").field() == "sizes.atoms");
  CHECK(config_error(R"({"kind": "spectral", "mode": "exact"})").field() == "mode");
  CHECK(config_error(R"({"kind": "axioms", "tolerances": {"exact": 0}})").field() ==
        "tolerances.exact");
  CHECK(config_error(R"({"kind": "spectral", "mode": "ensemble",
                         "spectrum": {"kind": "ar1", "phi": 1.5}})")
            .field()
            .starts_with("spectrum"));
}

TEST_CASE("every scenario kind passes on small sizes") {
  const std::pair<ScenarioKind, Mode> runs[] = {
      {ScenarioKind::axioms, Mode::exact},
      {ScenarioKind::axioms, Mode::ensemble},
      {ScenarioKind::isometry, Mode::exact},
      {ScenarioKind::isometry, Mode::ensemble},
      {ScenarioKind::change_of_measure, Mode::exact},
      {ScenarioKind::change_of_measure, Mode::ensemble},
      {ScenarioKind::approximation, Mode::exact},
      {ScenarioKind::spectral, Mode::ensemble},
      {ScenarioKind::filter, Mode::ensemble},
  };
  for (const auto& [kind, mode] : runs) {
    CAPTURE(to_string(kind));
    CAPTURE(to_string(mode));
    auto config = small(kind, mode);
    if (kind == ScenarioKind::isometry && mode == Mode::ensemble) config.sizes.ensemble = 20000;
    validate_config(config);
    const auto report = run_scenario(config);
    CHECK_FALSE(report.checks.empty());
    for (const auto& check : report.checks) {
      CAPTURE(check.name);
      CAPTURE(check.gap);
      CAPTURE(check.tolerance);
      CAPTURE(check.detail);
      CHECK(check.passed);
    }
    CHECK(report.passed());
  }
}

TEST_CASE("a tolerance of zero turns ensemble checks red") {
  auto config = small(ScenarioKind::axioms, Mode::ensemble);
  config.tolerances.relative = 1e-300;
  const auto report = run_scenario(config);
  CHECK_FALSE(report.passed());
}

TEST_CASE("reports round-trip and are deterministic") {
  const auto config = small(ScenarioKind::change_of_measure, Mode::exact);
  auto a = run_scenario(config);
  auto b = run_scenario(config);
  a.wall_time_seconds = b.wall_time_seconds = 0.0;
  const std::string json = emit_report(a, ReportFormat::json);
  CHECK(json == emit_report(b, ReportFormat::json));
  CHECK(json.find("\"schema_version\": 1") != std::string::npos);

  const auto back = parse_report(json);
  CHECK(emit_report(back, ReportFormat::json) == json);
  CHECK(back.checks.size() == a.checks.size());
  CHECK(back.seed == a.seed);

  const std::string csv = emit_report(a, ReportFormat::csv);
  CHECK(csv.starts_with("name,lhs_re,lhs_im,rhs_re,rhs_im,gap,tolerance,passed,detail\n"));
  CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(a.checks.size()) + 1);

  RunReport odd = a;
  odd.checks.front().gap = std::nan("");
  odd.checks.front().detail = "quote \" and, comma";
  const auto text = emit_report(odd, ReportFormat::json);
  CHECK(text.find("null") != std::string::npos);
  CHECK(std::isnan(parse_report(text).checks.front().gap));
  CHECK(parse_report(text).checks.front().detail == odd.checks.front().detail);
}

}  // TEST_SUITE
