#ifndef ORTHOMEASURE_CHANGE_OF_MEASURE_HPP
#define ORTHOMEASURE_CHANGE_OF_MEASURE_HPP

#include <cstddef>
#include <span>
#include <variant>

#include "orthomeasure/integration.hpp"
#include "orthomeasure/stochastic_measure.hpp"

namespace orthomeasure {

/**
 * A base measure M1, a density g in L2(M1) and the derived measure
 * M2(B) = int 1_B g dM1 together with its structural measure.
 *
 * For a general integrand g the derived measure is built from the projection
 * g_R of g at the resolution where the per-atom L2 integrals converged;
 * `density_projection` and `resolution_structure` hold g_R and the empirical
 * masses of M1 at that resolution. For simple g the resolution is the base
 * algebra itself.
 */
struct DerivedMeasureBundle {
  OrthogonalStochasticMeasure base;
  std::variant<SimpleFunction, Integrand> density;
  SimpleFunction density_projection;
  StructuralMeasure resolution_structure;
  unsigned resolution_level = 0;
  OrthogonalStochasticMeasure derived;
  StructuralMeasure derived_structural;
};

/// Simple density: M2(atom j) = g_j M1(atom j).
DerivedMeasureBundle derive_measure(const OrthogonalStochasticMeasure& base,
                                    const SimpleFunction& g);

/// General density: M2(atom j) = integrate_l2(1_{atom j} g, M1). Throws
/// NonConvergenceError if the Cauchy criterion fails.
DerivedMeasureBundle derive_measure(const OrthogonalStochasticMeasure& base, const Integrand& g,
                                    double target_eps, LevelSchedule schedule = {});

struct MassCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double gap = 0.0;
};

/// lhs = E|M2(B)|^2, rhs = int 1_B |g|^2 dM1 (sum over resolution atoms in B).
MassCheck structural_identity_check(const DerivedMeasureBundle& bundle, const AlgebraSet& set);

struct ChangeOfMeasureCheck {
  RandomElement lhs;  ///< int f dM2
  RandomElement rhs;  ///< int f g dM1
  double l2_gap = 0.0;
  double max_scenario_gap = 0.0;
};

/// Simple f on the base algebra: pathwise comparison of both sides.
ChangeOfMeasureCheck verify_change_of_measure(const DerivedMeasureBundle& bundle,
                                              const SimpleFunction& f);

/// General f: both sides through integrate_l2, each to target_eps. Throws
/// NonConvergenceError when either side fails to converge.
ChangeOfMeasureCheck verify_change_of_measure(const DerivedMeasureBundle& bundle,
                                              const Integrand& f, double target_eps,
                                              LevelSchedule schedule = {});

struct AdditivityGap {
  double gap = 0.0;        ///< E|M2(A) - sum_{j<=n} M2(A_j)|^2
  double predicted = 0.0;  ///< int 1_{A \ (A_1 u ... u A_n)} |g|^2 dM1
};

/// A is the union of all of `sequence`, which must be pairwise disjoint.
AdditivityGap countable_additivity_gap(const DerivedMeasureBundle& bundle,
                                       std::span<const AlgebraSet> sequence, std::size_t n);

}  // namespace orthomeasure

#endif  // ORTHOMEASURE_CHANGE_OF_MEASURE_HPP
