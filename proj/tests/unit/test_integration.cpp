#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "orthomeasure/error.hpp"
#include "orthomeasure/integration.hpp"

using namespace orthomeasure;
using cplx = std::complex<double>;

namespace {

ControlMass white_control(double variance = 1.0) {
  return [variance](const Interval& iv) { return variance * iv.width() / (2 * oracle::pi); };
}

SimpleFunction random_simple(std::mt19937_64& rng, const AtomAlgebra& algebra) {
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<cplx> c(algebra.atom_count());
  for (auto& x : c) x = {u(rng), u(rng)};
  return {algebra, c};
}

}  // namespace

TEST_SUITE("integration") {

TEST_CASE("simple integrals unfold the definition") {
  const auto model = ScenarioModel::uniform(3);
  const auto algebra = AtomAlgebra::singletons(3);
  const auto M = indicator_measure(model, algebra);
  const auto A = algebra.atom_set(0) | algebra.atom_set(2);
  const auto viaIndicator = integrate_simple(SimpleFunction::indicator(A), M);
  const auto viaEvaluate = M.evaluate(A);
  for (std::size_t k = 0; k < 3; ++k) CHECK(viaIndicator[k] == viaEvaluate[k]);

  const SimpleFunction f(algebra, {2.0, 3.0, 0.0});
  const auto x = integrate_simple(f, M);
  CHECK(x[0] == cplx(2));
  CHECK(x[1] == cplx(3));
  CHECK(x[2] == cplx(0));
  const auto zero = integrate_simple(SimpleFunction::zero(algebra), M);
  for (std::size_t k = 0; k < 3; ++k) CHECK(zero[k] == cplx(0));

  CHECK_THROWS_AS(integrate_simple(SimpleFunction::zero(AtomAlgebra::singletons(4)), M),
                  AlgebraMismatchError);
}

TEST_CASE("L2(M) norms") {
  const auto model = ScenarioModel::uniform(3);
  const auto algebra = AtomAlgebra::singletons(3);
  const auto m = structural_measure(indicator_measure(model, algebra));
  const auto A = algebra.atom_set(1) | algebra.atom_set(2);
  CHECK(l2_norm_simple(SimpleFunction::indicator(A), m) ==
        doctest::Approx(std::sqrt(m.mass(A))).epsilon(1e-15));
  const SimpleFunction f(algebra, {2.0, 3.0, 0.0});
  const double expected =
      std::sqrt(std::real(oracle::weighted_pairing({1 / 3., 1 / 3., 1 / 3.}, {2.0, 3.0, 0.0},
                                                   {2.0, 3.0, 0.0})));
  CHECK(l2_norm_simple(f, m) == doctest::Approx(expected).epsilon(1e-15));
  CHECK(l2_norm_simple(f, m) == doctest::Approx(std::sqrt(13.0 / 3.0)).epsilon(1e-15));
  const cplx c{-1.5, 2.0};
  CHECK(l2_norm_simple(c * f, m) == doctest::Approx(std::abs(c) * l2_norm_simple(f, m)).epsilon(1e-14));
}

TEST_CASE("isometry on exact spaces") {
  const auto model = ScenarioModel::uniform(3);
  const auto algebra = AtomAlgebra::singletons(3);
  const auto M = indicator_measure(model, algebra);
  const auto A = algebra.atom_set(0) | algebra.atom_set(1);
  const auto one = isometry_check(SimpleFunction::indicator(A), SimpleFunction::indicator(A), M);
  CHECK(one.lhs.real() == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(one.gap == 0.0);
  const auto disjoint = isometry_check(SimpleFunction::indicator(algebra.atom_set(0), 2.0),
                                       SimpleFunction::indicator(algebra.atom_set(2), 5.0), M);
  CHECK(disjoint.rhs == cplx(0));
  CHECK(std::abs(disjoint.lhs) <= 1e-15);

  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.05, 1);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t K = 3 + trial % 20;
    const std::size_t cells = 2 + trial % (K - 1);
    std::vector<double> w(K);
    double s = 0;
    for (auto& x : w) s += (x = u(rng));
    for (auto& x : w) x /= s;
    std::vector<std::size_t> owner(K);
    std::vector<std::vector<std::size_t>> cell_list(cells);
    for (std::size_t k = 0; k < K; ++k) {
      owner[k] = k < cells ? k : rng() % cells;
      cell_list[owner[k]].push_back(k);
    }
    const auto alg = AtomAlgebra::from_cells(K, cell_list);
    const auto mod = ScenarioModel::exact(w);
    const auto meas = indicator_measure(mod, alg);
    const auto f = random_simple(rng, alg), g = random_simple(rng, alg);
    const auto check = isometry_check(f, g, meas);
    const std::vector<cplx> fc(f.coeffs().begin(), f.coeffs().end());
    const std::vector<cplx> gc(g.coeffs().begin(), g.coeffs().end());
    const cplx lhs = oracle::weighted_pairing(w, oracle::indicator_integral(owner, fc),
                                              oracle::indicator_integral(owner, gc));
    const auto p = oracle::cell_probabilities(w, owner, cells);
    cplx rhs = 0;
    for (std::size_t j = 0; j < cells; ++j) rhs += fc[j] * std::conj(gc[j]) * p[j];
    CHECK(std::abs(check.lhs - lhs) < 1e-12);
    CHECK(std::abs(check.rhs - rhs) < 1e-12);
    CHECK(check.gap < 1e-12);

    // linearity and the norm form of the isometry
    const cplx a{0.3, 1.1}, b{-2.0, 0.25};
    const auto combo = integrate_simple(a * f + b * g, meas);
    RandomElement expected = integrate_simple(f, meas);
    expected *= a;
    expected.add_scaled(b, integrate_simple(g, meas));
    CHECK(l2_distance(mod, combo, expected) <= 1e-14);
    CHECK(l2_norm(mod, integrate_simple(f, meas)) ==
          doctest::Approx(l2_norm_simple(f, structural_measure(meas))).epsilon(1e-12));
  }
}

TEST_CASE("midpoint projection") {
  const auto algebra = AtomAlgebra::dyadic(3);
  const auto c = project_to_simple(Integrand::constant({1.5, -2}), algebra, 4);
  CHECK(c.algebra().atom_count() == 32);
  for (auto x : c.coeffs()) CHECK(x == cplx(1.5, -2));

  const auto upper = AtomAlgebra::with_pi_units({{0.0, 1.0}});
  const auto e = project_to_simple(Integrand::exponential(1), upper, 1);
  CHECK(std::abs(e.coeff(0) - cplx(0, 1)) < 1e-15);

  CHECK_THROWS_AS(project_to_simple(Integrand::constant(1.0), AtomAlgebra::abstract(2), 1),
                  UnsupportedError);

  // lambda -> lambda: L2(Lebesgue) projection error halves per level.
  const Integrand identity{[](double x) { return cplx(x); }};
  const auto base = AtomAlgebra::dyadic(0);
  double previous = 0;
  for (unsigned level = 1; level <= 8; ++level) {
    const auto p = project_to_simple(identity, base, std::size_t{1} << level);
    double err2 = 0;
    for (std::size_t i = 0; i < p.algebra().atom_count(); ++i) {
      const auto iv = p.algebra().interval(i);
      const double a = p.coeff(i).real();
      err2 += oracle::simpson([a](double x) { return (x - a) * (x - a); }, iv.lower, iv.upper, 8);
    }
    const double err = std::sqrt(err2);
    if (level > 1) CHECK(previous / err == doctest::Approx(2.0).epsilon(0.2));
    previous = err;
  }
}

TEST_CASE("L2 extension of the integral") {
  const auto M = gaussian_measure(AtomAlgebra::dyadic(3), white_control(), 200, 42);

  SUBCASE("simple integrands are fixed points at level 0") {
    std::mt19937_64 rng(1);
    const auto f = random_simple(rng, M.algebra());
    const auto r = integrate_l2(Integrand::from_simple(f), M, 1e-6);
    CHECK(r.converged);
    CHECK(r.achieved_level == 0);
    const auto direct = integrate_simple(f, M);
    for (std::size_t k = 0; k < 200; ++k) CHECK(r.value[k] == direct[k]);
  }

  SUBCASE("exponential gaps halve per level") {
    const auto r = integrate_l2(Integrand::exponential(1), M, 1e-9, {10, 0, 1});
    CHECK_FALSE(r.converged);
    REQUIRE(r.cauchy_gaps.size() == 10);
    for (std::size_t l = 1; l < r.cauchy_gaps.size(); ++l)
      CHECK(r.cauchy_gaps[l - 1] / r.cauchy_gaps[l] == doctest::Approx(2.0).epsilon(0.1));
    // closed form: gap at parent width h is 2 sin(h / 8) sqrt(total mass)
    for (std::size_t l = 0; l < r.cauchy_gaps.size(); ++l) {
      const double h = 2 * oracle::pi / std::ldexp(8.0, static_cast<int>(l));
      CHECK(r.cauchy_gaps[l] == doctest::Approx(2 * std::sin(h / 8)).epsilon(1e-9));
    }
  }

  SUBCASE("indicator of a non-dyadic interval") {
    const double a = -1.0, b = 0.7;
    const Integrand box{[=](double x) { return cplx(a <= x && x < b ? 1.0 : 0.0); }};
    const double eps = 0.02;
    const auto r = integrate_l2(box, M, eps, {14, 0, 1});
    CHECK(r.converged);
    // the gap from level l to l+1 is carried by the two atoms that straddle an endpoint
    for (std::size_t l = 0; l < r.cauchy_gaps.size(); ++l) {
      const double child = 2 * oracle::pi / std::ldexp(16.0, static_cast<int>(l)) / (2 * oracle::pi);
      CHECK(r.cauchy_gaps[l] * r.cauchy_gaps[l] <= 2 * child + 1e-15);
    }
    CHECK(r.cauchy_gaps.back() < eps);
  }

  SUBCASE("two schedules reach the same limit") {
    for (double n : {1.0, 3.0}) {
      const double eps = 1e-3;
      const auto fine = integrate_l2(Integrand::exponential(n), M, eps, {12, 1, 1});
      const auto coarse = integrate_l2(Integrand::exponential(n), M, eps, {12, 2, 2});
      REQUIRE(fine.converged);
      REQUIRE(coarse.converged);
      CHECK(l2_distance(M.model(), fine.value, coarse.value) < 2 * eps);
    }
  }

  SUBCASE("zero class and refusals") {
    const auto z = integrate_l2(Integrand::constant(0.0), M, 1e-6);
    CHECK(z.achieved_level == 0);
    for (std::size_t k = 0; k < 200; ++k) CHECK(z.value[k] == cplx(0));
    Integrand wild = Integrand::exponential(1);
    wild.declared_l2 = false;
    CHECK_THROWS_AS(integrate_l2(wild, M, 1e-3), ArgumentError);
    CHECK_THROWS_AS(integrate_l2(Integrand::exponential(1), M, 0.0), ArgumentError);
    const auto exact = indicator_measure(ScenarioModel::uniform(2), AtomAlgebra::singletons(2));
    CHECK_THROWS_AS(integrate_l2(Integrand::constant(1.0), exact, 1e-3), UnsupportedError);
    const auto stuck = integrate_l2(Integrand::exponential(1), M, 1e-6, {3, 0, 1});
    CHECK_FALSE(stuck.converged);
    CHECK(stuck.achieved_level == 3);
  }
}

}  // TEST_SUITE
