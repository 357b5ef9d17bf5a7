#include "orthomeasure/integration.hpp"

#include <cmath>

#include <fmt/format.h>

#include "orthomeasure/error.hpp"

namespace orthomeasure {

// --- SimpleFunction -------------------------------------------------------------

SimpleFunction::SimpleFunction(AtomAlgebra algebra, std::vector<Complex> coeffs)
    : algebra_(std::move(algebra)), coeffs_(std::move(coeffs)) {
  if (coeffs_.size() != algebra_.atom_count())
    throw DimensionError(fmt::format("{} coefficients for {} atoms", coeffs_.size(),
                                     algebra_.atom_count()));
}

SimpleFunction SimpleFunction::zero(const AtomAlgebra& algebra) {
  return {algebra, std::vector<Complex>(algebra.atom_count())};
}

SimpleFunction SimpleFunction::constant(const AtomAlgebra& algebra, Complex value) {
  return {algebra, std::vector<Complex>(algebra.atom_count(), value)};
}

SimpleFunction SimpleFunction::indicator(const AlgebraSet& set, Complex value) {
  std::vector<Complex> coeffs(set.atom_count());
  for (std::size_t j = 0; j < coeffs.size(); ++j)
    if (set.contains(j)) coeffs[j] = value;
  return {set.algebra(), std::move(coeffs)};
}

SimpleFunction SimpleFunction::lifted(const Refinement& refinement) const {
  require_same_algebra(algebra_, refinement.coarse);
  std::vector<Complex> fine(refinement.fine.atom_count());
  for (std::size_t i = 0; i < fine.size(); ++i) fine[i] = coeffs_[refinement.parent[i]];
  return {refinement.fine, std::move(fine)};
}

SimpleFunction SimpleFunction::conj() const {
  SimpleFunction out(*this);
  for (auto& c : out.coeffs_) c = std::conj(c);
  return out;
}

std::vector<double> SimpleFunction::squared_moduli() const {
  std::vector<double> out(coeffs_.size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = std::norm(coeffs_[j]);
  return out;
}

SimpleFunction& SimpleFunction::operator+=(const SimpleFunction& other) {
  require_same_algebra(algebra_, other.algebra_);
  for (std::size_t j = 0; j < coeffs_.size(); ++j) coeffs_[j] += other.coeffs_[j];
  return *this;
}

SimpleFunction& SimpleFunction::operator-=(const SimpleFunction& other) {
  require_same_algebra(algebra_, other.algebra_);
  for (std::size_t j = 0; j < coeffs_.size(); ++j) coeffs_[j] -= other.coeffs_[j];
  return *this;
}

SimpleFunction& SimpleFunction::operator*=(Complex scale) {
  for (auto& c : coeffs_) c *= scale;
  return *this;
}

SimpleFunction& SimpleFunction::operator*=(const SimpleFunction& other) {
  require_same_algebra(algebra_, other.algebra_);
  for (std::size_t j = 0; j < coeffs_.size(); ++j) coeffs_[j] *= other.coeffs_[j];
  return *this;
}

// --- Integrand --------------------------------------------------------------------

Integrand Integrand::exponential(double n) {
  return {[n](double lambda) { return Complex{std::cos(lambda * n), std::sin(lambda * n)}; }};
}

Integrand Integrand::constant(Complex value) {
  return {[value](double) { return value; }};
}

Integrand Integrand::from_simple(const SimpleFunction& f) {
  if (!f.algebra().has_intervals())
    throw UnsupportedError("only interval-labelled simple functions have a pointwise form");
  return {[f](double lambda) {
    const auto atom = f.algebra().locate(lambda);
    return atom ? f.coeff(*atom) : Complex{};
  }};
}

Integrand Integrand::product(Integrand f, Integrand g) {
  const bool l2 = f.declared_l2 && g.declared_l2;
  return {[f = std::move(f), g = std::move(g)](double lambda) { return f(lambda) * g(lambda); },
          l2};
}

// --- simple integrals ---------------------------------------------------------------

RandomElement integrate_simple(const SimpleFunction& f,
                               const OrthogonalStochasticMeasure& measure) {
  require_same_algebra(f.algebra(), measure.algebra());
  RandomElement out = RandomElement::zero(measure.model().size());
  for (std::size_t j = 0; j < f.coeffs().size(); ++j)
    if (f.coeff(j) != Complex{}) out.add_scaled(f.coeff(j), measure.atom_value(j));
  return out;
}

double l2_norm_simple(const SimpleFunction& f, const StructuralMeasure& structural) {
  require_same_algebra(f.algebra(), structural.algebra());
  double sum = 0.0;
  for (std::size_t j = 0; j < f.coeffs().size(); ++j)
    sum += std::norm(f.coeff(j)) * structural.atom_mass(j);
  return std::sqrt(sum);
}

Complex inner_product_simple(const SimpleFunction& f, const SimpleFunction& g,
                             const StructuralMeasure& structural) {
  require_same_algebra(f.algebra(), g.algebra());
  require_same_algebra(f.algebra(), structural.algebra());
  Complex sum{};
  for (std::size_t j = 0; j < f.coeffs().size(); ++j)
    sum += f.coeff(j) * std::conj(g.coeff(j)) * structural.atom_mass(j);
  return sum;
}

IdentityCheck isometry_check(const SimpleFunction& f, const SimpleFunction& g,
                             const OrthogonalStochasticMeasure& measure) {
  require_same_algebra(f.algebra(), g.algebra());
  const RandomElement int_f = integrate_simple(f, measure);
  const RandomElement int_g = integrate_simple(g, measure);
  IdentityCheck check;
  check.lhs = inner_product(measure.model(), int_f, int_g);
  check.rhs = inner_product_simple(f, g, structural_measure(measure));
  check.gap = std::abs(check.lhs - check.rhs);
  return check;
}

SimpleFunction project_to_simple(const Integrand& f, const AtomAlgebra& algebra,
                                 std::size_t factor) {
  if (!f.evaluate) throw ArgumentError("integrand has no evaluator");
  const Refinement refinement = refine(algebra, factor);
  const auto atoms = refinement.fine.intervals();
  std::vector<Complex> coeffs(atoms.size());
  for (std::size_t i = 0; i < atoms.size(); ++i) coeffs[i] = f(atoms[i].midpoint());
  return {refinement.fine, std::move(coeffs)};
}

// --- L2 extension -----------------------------------------------------------------------

namespace {

struct LevelSearch {
  unsigned level = 0;
  std::vector<double> gaps;
  bool converged = false;
  SimpleFunction projection;
};

LevelSearch find_level(const Integrand& f, const OrthogonalStochasticMeasure& measure,
                       double target_eps, const LevelSchedule& schedule) {
  if (!f.evaluate) throw ArgumentError("integrand has no evaluator");
  if (!f.declared_l2) throw ArgumentError("integrand is not declared square-integrable");
  if (!(target_eps > 0.0))
    throw ArgumentError(fmt::format("target eps must be positive, got {}", target_eps));
  if (schedule.step == 0) throw ArgumentError("level step must be positive");
  if (schedule.first_level > schedule.max_level)
    throw ArgumentError("first level exceeds max level");
  if (schedule.max_level > 24) throw ArgumentError("max level too fine");
  if (!measure.algebra().has_intervals())
    throw UnsupportedError("L2 integration needs an interval-labelled algebra");

  const AtomAlgebra& algebra = measure.algebra();
  unsigned level = schedule.first_level;
  SimpleFunction current = project_to_simple(f, algebra, std::size_t{1} << level);
  LevelSearch search{level, {}, false, current};
  while (level + schedule.step <= schedule.max_level) {
    const unsigned next_level = level + schedule.step;
    SimpleFunction next = project_to_simple(f, algebra, std::size_t{1} << next_level);
    const StructuralMeasure masses = measure.reference_structure(std::size_t{1} << next_level);
    double sum = 0.0;
    for (std::size_t i = 0; i < next.coeffs().size(); ++i)
      sum += std::norm(next.coeff(i) - current.coeff(i >> schedule.step)) * masses.atom_mass(i);
    const double gap = std::sqrt(sum);
    search.gaps.push_back(gap);
    if (gap < target_eps) {
      search.level = level;
      search.converged = true;
      search.projection = std::move(current);
      return search;
    }
    level = next_level;
    current = std::move(next);
  }
  search.level = level;
  search.projection = std::move(current);
  return search;
}

}  // namespace

L2Integral integrate_l2(const Integrand& f, const OrthogonalStochasticMeasure& measure,
                        double target_eps, LevelSchedule schedule) {
  LevelSearch search = find_level(f, measure, target_eps, schedule);
  const std::size_t factor = std::size_t{1} << search.level;
  L2Integral result;
  result.achieved_level = search.level;
  result.cauchy_gaps = std::move(search.gaps);
  result.converged = search.converged;
  const StructuralMeasure masses = measure.reference_structure(factor);
  if (l2_norm_simple(search.projection, masses) == 0.0) {
    // L2 class of zero.
    result.value = RandomElement::zero(measure.model().size());
    return result;
  }
  result.value = integrate_simple(search.projection, measure.refined(factor));
  return result;
}

L2AtomIntegrals integrate_l2_by_atom(const Integrand& f, const OrthogonalStochasticMeasure& measure,
                                     double target_eps, LevelSchedule schedule) {
  LevelSearch search = find_level(f, measure, target_eps, schedule);
  const std::size_t factor = std::size_t{1} << search.level;
  const OrthogonalStochasticMeasure fine = measure.refined(factor);
  const std::size_t atoms = measure.algebra().atom_count();
  std::vector<RandomElement> per_atom(atoms, RandomElement::zero(measure.model().size()));
  for (std::size_t j = 0; j < atoms; ++j)
    for (std::size_t r = 0; r < factor; ++r) {
      const std::size_t i = j * factor + r;
      if (search.projection.coeff(i) != Complex{})
        per_atom[j].add_scaled(search.projection.coeff(i), fine.atom_value(i));
    }
  return {std::move(per_atom),     search.level,
          std::move(search.gaps),  search.converged,
          search.projection,       structural_measure(fine)};
}

}  // namespace orthomeasure
