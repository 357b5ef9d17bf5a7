#ifndef ORTHOMEASURE_STOCHASTIC_MEASURE_HPP
#define ORTHOMEASURE_STOCHASTIC_MEASURE_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "orthomeasure/probability.hpp"
#include "orthomeasure/set_system.hpp"

namespace orthomeasure {

/// Nonnegative masses per atom, extended additively to every AlgebraSet.
class StructuralMeasure {
 public:
  StructuralMeasure(AtomAlgebra algebra, std::vector<double> atom_masses);

  const AtomAlgebra& algebra() const noexcept { return algebra_; }
  std::span<const double> atom_masses() const noexcept { return masses_; }
  double atom_mass(std::size_t atom) const { return masses_[atom]; }
  double mass(const AlgebraSet& set) const;
  double total() const noexcept;

 private:
  AtomAlgebra algebra_;
  std::vector<double> masses_;
};

class OrthogonalStochasticMeasure;

/**
 * A source able to realise one measure on successively refined versions of
 * its algebra, consistently: the values on the children of an atom always sum
 * to the value on the atom.
 */
class MeasureFamily {
 public:
  virtual ~MeasureFamily() = default;
  /// The measure on refine(base algebra, factor).fine.
  virtual OrthogonalStochasticMeasure at_factor(std::size_t factor) const = 0;
  /// Deterministic reference structural measure at the same resolution.
  virtual StructuralMeasure nominal_structure(std::size_t factor) const = 0;
};

/**
 * One random element per atom, extended additively: evaluate(A) is the sum
 * of the atom values inside A. Orthogonality is not enforced on construction
 * so that hand-built measures can be checked with validate_axioms.
 */
class OrthogonalStochasticMeasure {
 public:
  OrthogonalStochasticMeasure(AtomAlgebra algebra, ScenarioModel model,
                              std::vector<RandomElement> atom_values,
                              std::shared_ptr<const MeasureFamily> family = nullptr);

  const AtomAlgebra& algebra() const noexcept { return algebra_; }
  const ScenarioModel& model() const noexcept { return model_; }
  std::span<const RandomElement> atom_values() const noexcept { return atom_values_; }
  const RandomElement& atom_value(std::size_t atom) const { return atom_values_[atom]; }

  RandomElement evaluate(const AlgebraSet& set) const;

  bool refinable() const noexcept { return family_ != nullptr; }
  const std::shared_ptr<const MeasureFamily>& family() const noexcept { return family_; }
  /// This measure on refine(algebra(), factor).fine; factor 1 returns a copy.
  OrthogonalStochasticMeasure refined(std::size_t factor) const;
  /// The family's nominal structure when refinable, else the empirical one
  /// (factor 1 only).
  StructuralMeasure reference_structure(std::size_t factor = 1) const;

 private:
  AtomAlgebra algebra_;
  ScenarioModel model_;
  std::vector<RandomElement> atom_values_;
  std::shared_ptr<const MeasureFamily> family_;
};

/// atom_masses[j] = E|M(atom j)|^2.
StructuralMeasure structural_measure(const OrthogonalStochasticMeasure& measure);

/// M(A) = indicator of A, on an algebra of cells over the scenario index set.
OrthogonalStochasticMeasure indicator_measure(const ScenarioModel& model,
                                              const AtomAlgebra& algebra);

/// Mass assigned to an interval; used for atom masses and to split masses on
/// refinement.
using ControlMass = std::function<double(const Interval&)>;

struct GaussianOptions {
  /// Atoms in [0, pi) take the conjugate of their mirror atom's values, so
  /// that integrals of e^{i lambda n} are real. Requires a mirror-symmetric
  /// algebra and control.
  bool hermitian = false;
};

/**
 * Seed-deterministic complex Gaussian orthogonal measure.
 *
 * Base atom j, scenario k gets sqrt(m_j / 2) (xi + i eta) with xi, eta
 * standard normal. Refinement bisects atoms and draws each child pair from
 * its conditional law given the parent (a Gaussian bridge), so the base
 * values are the sums of the refined ones. Every draw is keyed by
 * (seed, interval or atom, scenario), which makes output independent of
 * evaluation order and thread partitioning.
 */
class GaussianMeasureGenerator {
 public:
  /// Masses taken from `control`; refinement splits mass in proportion to
  /// width.
  GaussianMeasureGenerator(AtomAlgebra algebra, const StructuralMeasure& control,
                           std::uint64_t seed, GaussianOptions options = {});
  /// Masses control(atom interval); refinement splits mass in proportion to
  /// control of the halves. Requires interval labels.
  GaussianMeasureGenerator(AtomAlgebra algebra, ControlMass control, std::uint64_t seed,
                           GaussianOptions options = {});

  const AtomAlgebra& algebra() const noexcept { return algebra_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const GaussianOptions& options() const noexcept { return options_; }

  /// Control masses on refine(algebra(), factor).fine; factor a power of two.
  StructuralMeasure control_at(std::size_t factor) const;

  /// Atom values of one scenario at the given refinement factor.
  void draw_scenario(std::size_t scenario, std::size_t factor, std::span<Complex> out) const;

  /// Scenarios [first, first + count) as an ensemble measure with `count`
  /// scenarios. The result carries no refinement family; gaussian_measure()
  /// attaches one.
  OrthogonalStochasticMeasure generate(std::size_t first, std::size_t count,
                                       std::size_t factor = 1) const;

 private:
  AtomAlgebra algebra_;
  std::vector<double> base_masses_;
  ControlMass control_;
  std::uint64_t seed_;
  GaussianOptions options_;
  std::vector<std::size_t> mirror_;
};

/// K >= 2 scenarios of the Gaussian measure with the given control masses.
OrthogonalStochasticMeasure gaussian_measure(const AtomAlgebra& algebra,
                                             const StructuralMeasure& control, std::size_t K,
                                             std::uint64_t seed, GaussianOptions options = {});
OrthogonalStochasticMeasure gaussian_measure(const AtomAlgebra& algebra, ControlMass control,
                                             std::size_t K, std::uint64_t seed,
                                             GaussianOptions options = {});

/// Orthogonality threshold for atoms i, j: absolute + clt_factor * sqrt(m_i m_j / K).
struct AxiomTolerance {
  double absolute = 0.0;
  double clt_factor = 0.0;

  /// 0 for exact models, 5 K^{-1/2} sqrt(m_i m_j) for ensembles.
  static AxiomTolerance for_model(const ScenarioModel& model);
};

enum class Axiom { empty_set, orthogonality, countable_additivity };

struct AxiomViolation {
  Axiom axiom;
  std::size_t first_atom = 0;
  std::size_t second_atom = 0;
  double residual = 0.0;
  double tolerance = 0.0;
};

struct AxiomReport {
  std::vector<AxiomViolation> violations;
  double empty_set_residual = 0.0;          ///< max |M(empty)|
  double max_orthogonality_residual = 0.0;  ///< max |E M(i) conj M(j)|, i != j
  double max_orthogonality_ratio = 0.0;     ///< max residual / threshold (0 if all zero)
  double additivity_gap = 0.0;              ///< E|M(S) - sum_j M(atom j)|^2
  std::size_t pairs_checked = 0;

  bool passed() const noexcept { return violations.empty(); }
};

AxiomReport validate_axioms(const OrthogonalStochasticMeasure& measure, AxiomTolerance tol);
/// Absolute tolerance only.
AxiomReport validate_axioms(const OrthogonalStochasticMeasure& measure, double tol);
/// AxiomTolerance::for_model(measure.model()).
AxiomReport validate_axioms(const OrthogonalStochasticMeasure& measure);

}  // namespace orthomeasure

#endif  // ORTHOMEASURE_STOCHASTIC_MEASURE_HPP
