#include <cmath>
#include <numbers>
#include <optional>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "orthomeasure/error.hpp"
#include "orthomeasure/set_system.hpp"

using namespace orthomeasure;

namespace {

AlgebraSet random_set(std::mt19937_64& rng, const AtomAlgebra& algebra) {
  return algebra.from_mask(rng() & ((std::uint64_t{1} << algebra.atom_count()) - 1));
}

double lebesgue(const AlgebraSet& set) {
  double sum = 0.0;
  for (std::size_t j : set.atoms()) sum += set.algebra().interval(j).width();
  return sum;
}

/// B_n = [2^-(n+1), 2^-n) as atom 1 of an algebra of [0, 1/2) that also
/// splits off every earlier B_m.
SetStream geometric_stream(std::size_t limit = 100000) {
  auto n = std::make_shared<std::size_t>(0);
  return [n, limit]() -> std::optional<AlgebraSet> {
    if (++*n > limit) return std::nullopt;
    const int k = static_cast<int>(*n);
    std::vector<Interval> atoms{{0.0, std::ldexp(1.0, -k - 1)}};
    for (int m = k; m >= 1; --m) atoms.push_back({std::ldexp(1.0, -m - 1), std::ldexp(1.0, -m)});
    return AtomAlgebra::from_intervals(std::move(atoms)).atom_set(1);
  };
}

}  // namespace

TEST_SUITE("set_system") {

TEST_CASE("partition algebras") {
  const auto three = AtomAlgebra::from_cells(5, {{0, 3}, {1}, {2, 4}});
  CHECK(three.atom_count() == 3);
  CHECK(three.set_count() == 8);
  CHECK(three.atom_of_ground()[4] == 2);
  for (unsigned level = 0; level <= 6; ++level)
    CHECK(AtomAlgebra::dyadic(level).atom_count() == (std::size_t{1} << level));
  CHECK_THROWS_AS(AtomAlgebra::from_cells(3, {{0, 1}, {1, 2}}), ConstructionError);
  CHECK_THROWS_AS(AtomAlgebra::from_cells(3, {{0, 1, 2}, {}}), ConstructionError);
  CHECK_THROWS_AS(AtomAlgebra::from_cells(3, {{0}, {1}}), ConstructionError);
  CHECK_THROWS_AS(AtomAlgebra::from_intervals({{0.0, 1.0}, {0.5, 2.0}}), ConstructionError);
  CHECK_THROWS_AS(AtomAlgebra::from_intervals({{1.0, 1.0}}), ConstructionError);
  CHECK_THROWS_AS(AtomAlgebra::from_intervals({{0.0, 4.0}}), ConstructionError);
}

TEST_CASE("dyadic endpoints are exact and locate finds atoms") {
  const auto a = AtomAlgebra::dyadic(3);
  CHECK(a.interval(0).lower == -std::numbers::pi);
  CHECK(a.interval(7).upper == std::numbers::pi);
  CHECK(a.interval(4).lower == 0.0);
  CHECK(a.locate(0.0) == std::optional<std::size_t>(4));
  CHECK(a.locate(-std::numbers::pi) == std::optional<std::size_t>(0));
  CHECK_FALSE(a.locate(std::numbers::pi).has_value());
}

TEST_CASE("Boolean identities on random sets") {
  std::mt19937_64 rng(5);
  const auto algebra = AtomAlgebra::abstract(12);
  for (int trial = 0; trial < 300; ++trial) {
    const auto A = random_set(rng, algebra), B = random_set(rng, algebra);
    const auto A2 = random_set(rng, algebra), B2 = random_set(rng, algebra);
    const auto C = random_set(rng, algebra);
    CHECK((A ^ A).empty());
    CHECK((A ^ B) == (~A ^ ~B));
    CHECK(((A | A2) ^ (B | B2)).is_subset_of((A ^ B) | (A2 ^ B2)));
    CHECK((A ^ B) == (B ^ A));
    CHECK(((A ^ B) ^ C) == (A ^ (B ^ C)));
    CHECK((A - B) == (A & ~B));
    CHECK((A | ~A) == algebra.full_set());
  }
  const auto other = AtomAlgebra::abstract(12);
  CHECK_NOTHROW(algebra.full_set() | other.full_set());  // structurally equal algebras
  CHECK_THROWS_AS(algebra.full_set() | AtomAlgebra::abstract(3).full_set(), AlgebraMismatchError);
}

TEST_CASE("refinement") {
  const auto one = AtomAlgebra::dyadic(1);
  const auto r = refine(one, 2);
  CHECK(r.fine == AtomAlgebra::dyadic(2));
  CHECK(refine(one, 1).fine == one);
  for (std::size_t factor : {2u, 3u, 5u, 8u}) {
    const auto coarse = AtomAlgebra::from_intervals({{-3.0, -1.0}, {-1.0, 0.5}, {2.0, 3.0}});
    const auto fine = refine(coarse, factor);
    std::vector<int> hits(coarse.atom_count(), 0);
    double total = 0.0;
    for (std::size_t i = 0; i < fine.fine.atom_count(); ++i) {
      ++hits[fine.parent[i]];
      CHECK(coarse.interval(fine.parent[i]).contains(fine.fine.interval(i)));
      total += fine.fine.interval(i).width();
    }
    for (int h : hits) CHECK(h == static_cast<int>(factor));
    CHECK(total == doctest::Approx(2.0 + 1.5 + 1.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(refine(AtomAlgebra::abstract(3), 2), UnsupportedError);
  const auto lifted = r.lift(one.atom_set(1));
  CHECK(lifted.atoms() == std::vector<std::size_t>{2, 3});
}

TEST_CASE("countable union truncation on the geometric fixture") {
  double expected_residual = 0.0;
  const std::size_t expected = oracle::geometric_truncation(0.01, &expected_residual);
  const auto result = approximate_countable_union(geometric_stream(), lebesgue, 0.01);
  CHECK(result.terms == expected);
  CHECK(result.terms == 6);
  CHECK(result.residual == doctest::Approx(expected_residual).epsilon(1e-12));
  CHECK(result.residual == doctest::Approx(std::ldexp(1.0, -7)).epsilon(1e-12));
  CHECK(lebesgue(result.set) == doctest::Approx(0.5 - std::ldexp(1.0, -7)).epsilon(1e-12));

  for (int e = 1; e <= 6; ++e) {
    const double eps = std::pow(10.0, -e);
    const auto r = approximate_countable_union(geometric_stream(), lebesgue, eps);
    CHECK(r.terms == oracle::geometric_truncation(eps));
    CHECK(r.residual < eps);
  }
}

TEST_CASE("countable union edge cases") {
  const auto alg = AtomAlgebra::dyadic(2);
  bool given = false;
  const SetStream single = [&]() -> std::optional<AlgebraSet> {
    if (given) return std::nullopt;
    given = true;
    return alg.atom_set(2);
  };
  const auto one = approximate_countable_union(single, lebesgue, 1e-3);
  CHECK(one.terms == 1);
  CHECK(one.residual == 0.0);

  const auto vacuous = approximate_countable_union(geometric_stream(), lebesgue, 1.0);
  CHECK(vacuous.terms == 0);
  CHECK(vacuous.set.empty());

  CHECK_THROWS_AS(approximate_countable_union(geometric_stream(), lebesgue, 0.0), ArgumentError);
  CHECK_THROWS_AS(approximate_countable_union(geometric_stream(), lebesgue, -1.0), ArgumentError);

  // Every term carries unit mass: the partial sums never settle.
  const auto fine = AtomAlgebra::dyadic(12);
  std::size_t next = 0;
  const SetStream heavy = [&]() -> std::optional<AlgebraSet> {
    return fine.atom_set(next++ % fine.atom_count());
  };
  const SetMass unit = [](const AlgebraSet& s) { return static_cast<double>(s.size()); };
  CHECK_THROWS_AS(approximate_countable_union(heavy, unit, 0.5, 1000), DivergenceError);

  std::size_t repeat = 0;
  const SetStream overlapping = [&]() -> std::optional<AlgebraSet> {
    if (repeat++ >= 2) return std::nullopt;
    return alg.atom_set(0);
  };
  CHECK_THROWS_AS(approximate_countable_union(overlapping, lebesgue, 0.1), ArgumentError);
}

TEST_CASE("finite targets are recovered exactly") {
  std::mt19937_64 rng(17);
  const auto algebra = AtomAlgebra::from_cells(9, {{0, 1}, {2}, {3, 4, 5}, {6}, {7, 8}});
  const std::vector<double> masses{0.1, 0.3, 0.05, 0.25, 0.3};
  const SetMass mass = [&](const AlgebraSet& s) {
    double m = 0;
    for (std::size_t j : s.atoms()) m += masses[j];
    return m;
  };
  for (std::uint64_t m = 0; m < 32; ++m) {
    const auto target = algebra.from_mask(m);
    for (double eps : {1e-1, 1e-6, 1e-12}) {
      const auto r = approximate_algebra_set(target, mass, eps);
      if (eps < 0.05) {
        CHECK(r.set == target);
        CHECK(mass(r.set ^ target) == 0.0);
      }
      CHECK(mass(r.set ^ target) < eps);
    }
  }
}

}  // TEST_SUITE
