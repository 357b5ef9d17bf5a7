#include "orthomeasure/change_of_measure.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "orthomeasure/error.hpp"

namespace orthomeasure {

namespace {

/**
 * Refinements of g_R Z1, where g_R is the density at resolution factor R.
 * Below R the values are sums over groups of resolution atoms; above R the
 * base is refined further and g_R is lifted.
 */
class DerivedFamily final : public MeasureFamily {
 public:
  DerivedFamily(OrthogonalStochasticMeasure base, SimpleFunction density, std::size_t resolution)
      : base_(std::move(base)), density_(std::move(density)), resolution_(resolution) {}

  OrthogonalStochasticMeasure at_factor(std::size_t factor) const override {
    const std::size_t fine_factor = std::max(factor, resolution_);
    check_factor(factor, fine_factor);
    const OrthogonalStochasticMeasure fine = base_.refined(fine_factor);
    const SimpleFunction g = density_at(fine_factor);
    const std::size_t group = fine_factor / factor;
    const AtomAlgebra target = refine(base_.algebra(), factor).fine;
    std::vector<RandomElement> values(target.atom_count(),
                                      RandomElement::zero(base_.model().size()));
    for (std::size_t i = 0; i < fine.algebra().atom_count(); ++i)
      if (g.coeff(i) != Complex{}) values[i / group].add_scaled(g.coeff(i), fine.atom_value(i));
    return {target, base_.model(), std::move(values)};
  }

  StructuralMeasure nominal_structure(std::size_t factor) const override {
    const std::size_t fine_factor = std::max(factor, resolution_);
    check_factor(factor, fine_factor);
    const StructuralMeasure fine = base_.reference_structure(fine_factor);
    const auto g2 = density_at(fine_factor).squared_moduli();
    const std::size_t group = fine_factor / factor;
    const AtomAlgebra target = refine(base_.algebra(), factor).fine;
    std::vector<double> masses(target.atom_count());
    for (std::size_t i = 0; i < g2.size(); ++i) masses[i / group] += g2[i] * fine.atom_mass(i);
    return {target, std::move(masses)};
  }

 private:
  static void check_factor(std::size_t factor, std::size_t fine_factor) {
    if (factor == 0 || fine_factor % factor != 0)
      throw UnsupportedError(fmt::format(
          "derived measure: factor {} does not divide resolution factor {}", factor, fine_factor));
  }

  SimpleFunction density_at(std::size_t fine_factor) const {
    if (fine_factor == resolution_) return density_;
    const Refinement step = refine(density_.algebra(), fine_factor / resolution_);
    return density_.lifted(step);
  }

  OrthogonalStochasticMeasure base_;
  SimpleFunction density_;
  std::size_t resolution_;
};

OrthogonalStochasticMeasure with_family(const OrthogonalStochasticMeasure& base,
                                        std::vector<RandomElement> values,
                                        const SimpleFunction& projection,
                                        std::size_t resolution) {
  std::shared_ptr<const MeasureFamily> family;
  if (base.refinable()) family = std::make_shared<DerivedFamily>(base, projection, resolution);
  return {base.algebra(), base.model(), std::move(values), std::move(family)};
}

double resolution_mass(const DerivedMeasureBundle& bundle, const AlgebraSet& set) {
  require_same_algebra(set.algebra(), bundle.base.algebra());
  const unsigned shift = bundle.resolution_level;
  const auto g2 = bundle.density_projection.squared_moduli();
  double sum = 0.0;
  for (std::size_t i = 0; i < g2.size(); ++i)
    if (set.contains(i >> shift)) sum += g2[i] * bundle.resolution_structure.atom_mass(i);
  return sum;
}

ChangeOfMeasureCheck compare(RandomElement lhs, RandomElement rhs, const ScenarioModel& model) {
  ChangeOfMeasureCheck check{std::move(lhs), std::move(rhs), 0.0, 0.0};
  check.l2_gap = l2_distance(model, check.lhs, check.rhs);
  for (std::size_t k = 0; k < check.lhs.size(); ++k)
    check.max_scenario_gap = std::max(check.max_scenario_gap, std::abs(check.lhs[k] - check.rhs[k]));
  return check;
}

}  // namespace

DerivedMeasureBundle derive_measure(const OrthogonalStochasticMeasure& base,
                                    const SimpleFunction& g) {
  require_same_algebra(g.algebra(), base.algebra());
  std::vector<RandomElement> values(base.algebra().atom_count(),
                                    RandomElement::zero(base.model().size()));
  for (std::size_t j = 0; j < values.size(); ++j)
    if (g.coeff(j) != Complex{}) values[j].add_scaled(g.coeff(j), base.atom_value(j));
  std::shared_ptr<const MeasureFamily> family;
  if (base.refinable()) family = std::make_shared<DerivedFamily>(base, g, 1);
  OrthogonalStochasticMeasure derived(base.algebra(), base.model(), std::move(values),
                                      std::move(family));
  StructuralMeasure derived_structural = structural_measure(derived);
  return {base, g, g, structural_measure(base), 0, std::move(derived),
          std::move(derived_structural)};
}

DerivedMeasureBundle derive_measure(const OrthogonalStochasticMeasure& base, const Integrand& g,
                                    double target_eps, LevelSchedule schedule) {
  L2AtomIntegrals per_atom = integrate_l2_by_atom(g, base, target_eps, schedule);
  if (!per_atom.converged)
    throw NonConvergenceError(fmt::format(
        "density did not meet the Cauchy target {} by level {}; last gap {}", target_eps,
        per_atom.achieved_level,
        per_atom.cauchy_gaps.empty() ? 0.0 : per_atom.cauchy_gaps.back()));
  const std::size_t resolution = std::size_t{1} << per_atom.achieved_level;
  OrthogonalStochasticMeasure derived = with_family(base, std::move(per_atom.atom_integrals),
                                                    per_atom.projection, resolution);
  StructuralMeasure derived_structural = structural_measure(derived);
  return {base,
          g,
          std::move(per_atom.projection),
          std::move(per_atom.resolution_structure),
          per_atom.achieved_level,
          std::move(derived),
          std::move(derived_structural)};
}

MassCheck structural_identity_check(const DerivedMeasureBundle& bundle, const AlgebraSet& set) {
  MassCheck check;
  check.lhs = mean_square(bundle.derived.model(), bundle.derived.evaluate(set));
  check.rhs = resolution_mass(bundle, set);
  check.gap = std::abs(check.lhs - check.rhs);
  return check;
}

ChangeOfMeasureCheck verify_change_of_measure(const DerivedMeasureBundle& bundle,
                                              const SimpleFunction& f) {
  require_same_algebra(f.algebra(), bundle.base.algebra());
  RandomElement lhs = integrate_simple(f, bundle.derived);
  RandomElement rhs;
  if (bundle.resolution_level == 0) {
    rhs = integrate_simple(f * bundle.density_projection, bundle.base);
  } else {
    const std::size_t resolution = std::size_t{1} << bundle.resolution_level;
    const Refinement refinement = refine(f.algebra(), resolution);
    rhs = integrate_simple(f.lifted(refinement) * bundle.density_projection,
                           bundle.base.refined(resolution));
  }
  return compare(std::move(lhs), std::move(rhs), bundle.base.model());
}

ChangeOfMeasureCheck verify_change_of_measure(const DerivedMeasureBundle& bundle,
                                              const Integrand& f, double target_eps,
                                              LevelSchedule schedule) {
  const Integrand g = std::holds_alternative<Integrand>(bundle.density)
                          ? std::get<Integrand>(bundle.density)
                          : Integrand::from_simple(std::get<SimpleFunction>(bundle.density));
  const L2Integral lhs = integrate_l2(f, bundle.derived, target_eps, schedule);
  const L2Integral rhs = integrate_l2(Integrand::product(f, g), bundle.base, target_eps, schedule);
  if (!lhs.converged || !rhs.converged)
    throw NonConvergenceError(fmt::format(
        "change of measure: {} side did not meet the Cauchy target {}",
        lhs.converged ? "right" : "left", target_eps));
  return compare(lhs.value, rhs.value, bundle.base.model());
}

AdditivityGap countable_additivity_gap(const DerivedMeasureBundle& bundle,
                                       std::span<const AlgebraSet> sequence, std::size_t n) {
  if (n > sequence.size())
    throw ArgumentError(fmt::format("n = {} exceeds the {} supplied sets", n, sequence.size()));
  const AtomAlgebra& algebra = bundle.derived.algebra();
  AlgebraSet all = algebra.empty_set();
  for (std::size_t j = 0; j < sequence.size(); ++j) {
    require_same_algebra(sequence[j].algebra(), algebra);
    if (!sequence[j].disjoint_from(all))
      throw ArgumentError(fmt::format("set {} meets an earlier set of the sequence", j));
    all = all | sequence[j];
  }
  RandomElement remainder = bundle.derived.evaluate(all);
  AlgebraSet covered = algebra.empty_set();
  for (std::size_t j = 0; j < n; ++j) {
    remainder -= bundle.derived.evaluate(sequence[j]);
    covered = covered | sequence[j];
  }
  AdditivityGap out;
  out.gap = mean_square(bundle.derived.model(), remainder);
  out.predicted = resolution_mass(bundle, all - covered);
  return out;
}

}  // namespace orthomeasure
