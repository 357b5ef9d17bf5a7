#include "orthomeasure/stochastic_measure.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "keyed_random.hpp"
#include "orthomeasure/error.hpp"
#include "parallel.hpp"

namespace orthomeasure {

// --- StructuralMeasure --------------------------------------------------------

StructuralMeasure::StructuralMeasure(AtomAlgebra algebra, std::vector<double> atom_masses)
    : algebra_(std::move(algebra)), masses_(std::move(atom_masses)) {
  if (masses_.size() != algebra_.atom_count())
    throw DimensionError(fmt::format("{} masses for {} atoms", masses_.size(),
                                     algebra_.atom_count()));
  for (std::size_t j = 0; j < masses_.size(); ++j)
    if (!(masses_[j] >= 0.0) || !std::isfinite(masses_[j]))
      throw ArgumentError(fmt::format("atom {} has invalid mass {}", j, masses_[j]));
}

double StructuralMeasure::mass(const AlgebraSet& set) const {
  require_same_algebra(set.algebra(), algebra_);
  double sum = 0.0;
  for (std::size_t j = 0; j < masses_.size(); ++j)
    if (set.contains(j)) sum += masses_[j];
  return sum;
}

double StructuralMeasure::total() const noexcept {
  double sum = 0.0;
  for (double m : masses_) sum += m;
  return sum;
}

// --- OrthogonalStochasticMeasure ----------------------------------------------

namespace {

/// Family of a measure obtained by refining another family's base by `offset`.
class OffsetFamily final : public MeasureFamily {
 public:
  OffsetFamily(std::shared_ptr<const MeasureFamily> root, std::size_t offset)
      : root_(std::move(root)), offset_(offset) {}

  OrthogonalStochasticMeasure at_factor(std::size_t factor) const override {
    return root_->at_factor(offset_ * factor);
  }
  StructuralMeasure nominal_structure(std::size_t factor) const override {
    return root_->nominal_structure(offset_ * factor);
  }

 private:
  std::shared_ptr<const MeasureFamily> root_;
  std::size_t offset_;
};

}  // namespace

OrthogonalStochasticMeasure::OrthogonalStochasticMeasure(
    AtomAlgebra algebra, ScenarioModel model, std::vector<RandomElement> atom_values,
    std::shared_ptr<const MeasureFamily> family)
    : algebra_(std::move(algebra)),
      model_(std::move(model)),
      atom_values_(std::move(atom_values)),
      family_(std::move(family)) {
  if (atom_values_.size() != algebra_.atom_count())
    throw DimensionError(fmt::format("{} atom values for {} atoms", atom_values_.size(),
                                     algebra_.atom_count()));
  for (std::size_t j = 0; j < atom_values_.size(); ++j)
    if (atom_values_[j].size() != model_.size())
      throw DimensionError(fmt::format("atom {} has {} scenarios, model has {}", j,
                                       atom_values_[j].size(), model_.size()));
}

RandomElement OrthogonalStochasticMeasure::evaluate(const AlgebraSet& set) const {
  require_same_algebra(set.algebra(), algebra_);
  RandomElement out = RandomElement::zero(model_.size());
  for (std::size_t j = 0; j < atom_values_.size(); ++j)
    if (set.contains(j)) out += atom_values_[j];
  return out;
}

OrthogonalStochasticMeasure OrthogonalStochasticMeasure::refined(std::size_t factor) const {
  if (factor == 0) throw ArgumentError("refinement factor must be positive");
  if (factor == 1) return *this;
  if (!family_) throw UnsupportedError("measure carries no refinement family");
  OrthogonalStochasticMeasure fine = family_->at_factor(factor);
  fine.family_ = std::make_shared<OffsetFamily>(family_, factor);
  return fine;
}

StructuralMeasure OrthogonalStochasticMeasure::reference_structure(std::size_t factor) const {
  if (family_) return family_->nominal_structure(factor);
  if (factor != 1) throw UnsupportedError("measure carries no refinement family");
  return structural_measure(*this);
}

StructuralMeasure structural_measure(const OrthogonalStochasticMeasure& measure) {
  std::vector<double> masses(measure.algebra().atom_count());
  for (std::size_t j = 0; j < masses.size(); ++j)
    masses[j] = mean_square(measure.model(), measure.atom_value(j));
  return {measure.algebra(), std::move(masses)};
}

OrthogonalStochasticMeasure indicator_measure(const ScenarioModel& model,
                                              const AtomAlgebra& algebra) {
  if (!algebra.has_cells() || algebra.ground_size() != model.size())
    throw AlgebraMismatchError(fmt::format(
        "indicator measure needs an algebra over the {} scenario indices", model.size()));
  const auto owner = algebra.atom_of_ground();
  std::vector<RandomElement> values(algebra.atom_count(), RandomElement::zero(model.size()));
  for (std::size_t k = 0; k < model.size(); ++k) values[owner[k]][k] = 1.0;
  return {algebra, model, std::move(values)};
}

// --- Gaussian measures ----------------------------------------------------------

namespace {

constexpr std::uint64_t kBaseTag = 0x6261736500000001ULL;
constexpr std::uint64_t kBridgeTag = 0x6272696467650002ULL;

std::uint64_t interval_key(const Interval& iv, std::uint64_t tag) {
  return detail::combine(detail::combine(tag, detail::double_bits(iv.lower)),
                         detail::double_bits(iv.upper));
}

std::vector<std::size_t> mirror_map(const AtomAlgebra& algebra) {
  const auto iv = algebra.intervals();
  std::vector<std::size_t> mirror(iv.size());
  for (std::size_t j = 0; j < iv.size(); ++j) {
    if (iv[j].lower < 0.0 && iv[j].upper > 0.0)
      throw ArgumentError(fmt::format(
          "hermitian measure: atom [{}, {}) straddles 0", iv[j].lower, iv[j].upper));
    const auto m = algebra.locate(-iv[j].upper);
    if (!m || !(iv[*m] == Interval{-iv[j].upper, -iv[j].lower}))
      throw ArgumentError(fmt::format(
          "hermitian measure: atom [{}, {}) has no mirror atom", iv[j].lower, iv[j].upper));
    mirror[j] = *m;
  }
  return mirror;
}

void check_mirror_masses(std::span<const double> masses, std::span<const std::size_t> mirror) {
  for (std::size_t j = 0; j < masses.size(); ++j) {
    const double a = masses[j];
    const double b = masses[mirror[j]];
    if (std::abs(a - b) > 1e-12 * std::max(1.0, std::max(a, b)))
      throw ArgumentError(fmt::format(
          "hermitian measure: control masses of atom {} and its mirror differ ({} vs {})", j, a,
          b));
  }
}

/// Intervals, masses and mirror maps of every bisection level up to a factor.
struct GaussianLadder {
  std::vector<AtomAlgebra> algebras;
  std::vector<std::vector<double>> masses;
  std::vector<std::vector<std::size_t>> mirrors;
};

GaussianLadder build_ladder(const AtomAlgebra& base, std::span<const double> base_masses,
                            const ControlMass& control, bool hermitian, std::size_t factor) {
  if (factor == 0 || !std::has_single_bit(factor))
    throw UnsupportedError(
        fmt::format("Gaussian refinement factor {} is not a power of two", factor));
  if (factor > 1 && !base.has_intervals())
    throw UnsupportedError("Gaussian refinement needs an interval-labelled algebra");
  GaussianLadder ladder;
  ladder.algebras.push_back(base);
  ladder.masses.emplace_back(base_masses.begin(), base_masses.end());
  if (hermitian) ladder.mirrors.push_back(mirror_map(base));

  const unsigned steps = static_cast<unsigned>(std::countr_zero(factor));
  for (unsigned s = 1; s <= steps; ++s) {
    AtomAlgebra fine = refine(base, std::size_t{1} << s).fine;
    const auto& parent_masses = ladder.masses.back();
    const auto iv = fine.intervals();
    std::vector<double> masses(fine.atom_count());
    for (std::size_t p = 0; p < parent_masses.size(); ++p) {
      const Interval& left = iv[2 * p];
      const Interval& right = iv[2 * p + 1];
      double wl = control ? control(left) : left.width();
      double wr = control ? control(right) : right.width();
      if (!(wl >= 0.0) || !(wr >= 0.0) || !(wl + wr > 0.0)) {
        wl = left.width();
        wr = right.width();
      }
      const double m = parent_masses[p];
      const double ml = m * (wl / (wl + wr));
      masses[2 * p] = ml;
      masses[2 * p + 1] = std::max(0.0, m - ml);
    }
    if (hermitian) ladder.mirrors.push_back(mirror_map(fine));
    ladder.algebras.push_back(std::move(fine));
    ladder.masses.push_back(std::move(masses));
  }
  return ladder;
}

/// Fills `out` with one scenario's atom values on the last ladder level.
void draw_on_ladder(const GaussianLadder& ladder, std::uint64_t seed, std::size_t scenario,
                    bool hermitian, std::vector<Complex>& current, std::vector<Complex>& next) {
  const AtomAlgebra& base = ladder.algebras.front();
  const auto& base_masses = ladder.masses.front();
  const bool labelled = base.has_intervals();
  current.assign(base.atom_count(), Complex{});
  for (std::size_t j = 0; j < current.size(); ++j) {
    if (hermitian && base.interval(j).lower >= 0.0) continue;
    const double m = base_masses[j];
    if (m <= 0.0) continue;
    const std::uint64_t node = labelled ? interval_key(base.interval(j), kBaseTag)
                                        : detail::combine(kBaseTag, j);
    const std::uint64_t key = detail::combine(detail::combine(seed, node), scenario);
    current[j] = std::sqrt(m) * detail::unit_complex_normal(key);
  }
  if (hermitian) {
    const auto& mirror = ladder.mirrors.front();
    for (std::size_t j = 0; j < current.size(); ++j)
      if (base.interval(j).lower >= 0.0) current[j] = std::conj(current[mirror[j]]);
  }

  for (std::size_t s = 1; s < ladder.algebras.size(); ++s) {
    const auto& parents = ladder.algebras[s - 1];
    const auto& parent_masses = ladder.masses[s - 1];
    const auto& child_masses = ladder.masses[s];
    next.assign(2 * current.size(), Complex{});
    for (std::size_t p = 0; p < current.size(); ++p) {
      const double m = parent_masses[p];
      if (m <= 0.0) continue;
      if (hermitian && parents.interval(p).lower >= 0.0) continue;
      const double ml = child_masses[2 * p];
      const double mr = child_masses[2 * p + 1];
      const std::uint64_t node = interval_key(parents.interval(p), kBridgeTag);
      const std::uint64_t key = detail::combine(detail::combine(seed, node), scenario);
      const Complex w = detail::unit_complex_normal(key);
      const Complex left = (ml / m) * current[p] + std::sqrt(ml * mr / m) * w;
      next[2 * p] = left;
      next[2 * p + 1] = current[p] - left;
    }
    if (hermitian) {
      const auto& children = ladder.algebras[s];
      const auto& mirror = ladder.mirrors[s];
      for (std::size_t j = 0; j < next.size(); ++j)
        if (children.interval(j).lower >= 0.0) next[j] = std::conj(next[mirror[j]]);
    }
    current.swap(next);
  }
}

class GaussianFamily final : public MeasureFamily {
 public:
  GaussianFamily(GaussianMeasureGenerator generator, std::size_t scenarios)
      : generator_(std::move(generator)), scenarios_(scenarios) {}

  OrthogonalStochasticMeasure at_factor(std::size_t factor) const override {
    return generator_.generate(0, scenarios_, factor);
  }
  StructuralMeasure nominal_structure(std::size_t factor) const override {
    return generator_.control_at(factor);
  }

 private:
  GaussianMeasureGenerator generator_;
  std::size_t scenarios_;
};

}  // namespace

GaussianMeasureGenerator::GaussianMeasureGenerator(AtomAlgebra algebra,
                                                   const StructuralMeasure& control,
                                                   std::uint64_t seed, GaussianOptions options)
    : algebra_(std::move(algebra)),
      base_masses_(control.atom_masses().begin(), control.atom_masses().end()),
      seed_(seed),
      options_(options) {
  require_same_algebra(control.algebra(), algebra_);
  if (options_.hermitian) {
    mirror_ = mirror_map(algebra_);
    check_mirror_masses(base_masses_, mirror_);
  }
}

GaussianMeasureGenerator::GaussianMeasureGenerator(AtomAlgebra algebra, ControlMass control,
                                                   std::uint64_t seed, GaussianOptions options)
    : algebra_(std::move(algebra)), control_(std::move(control)), seed_(seed), options_(options) {
  if (!control_) throw ArgumentError("control mass function is empty");
  const auto iv = algebra_.intervals();
  base_masses_.resize(iv.size());
  for (std::size_t j = 0; j < iv.size(); ++j) {
    const double m = control_(iv[j]);
    if (!(m >= 0.0) || !std::isfinite(m))
      throw ArgumentError(fmt::format("control mass {} on atom {} is invalid", m, j));
    base_masses_[j] = m;
  }
  if (options_.hermitian) {
    mirror_ = mirror_map(algebra_);
    check_mirror_masses(base_masses_, mirror_);
  }
}

StructuralMeasure GaussianMeasureGenerator::control_at(std::size_t factor) const {
  GaussianLadder ladder = build_ladder(algebra_, base_masses_, control_, false, factor);
  return {ladder.algebras.back(), std::move(ladder.masses.back())};
}

void GaussianMeasureGenerator::draw_scenario(std::size_t scenario, std::size_t factor,
                                             std::span<Complex> out) const {
  const GaussianLadder ladder =
      build_ladder(algebra_, base_masses_, control_, options_.hermitian, factor);
  if (out.size() != ladder.algebras.back().atom_count())
    throw DimensionError(fmt::format("output has {} slots for {} atoms", out.size(),
                                     ladder.algebras.back().atom_count()));
  std::vector<Complex> current, next;
  draw_on_ladder(ladder, seed_, scenario, options_.hermitian, current, next);
  std::copy(current.begin(), current.end(), out.begin());
}

OrthogonalStochasticMeasure GaussianMeasureGenerator::generate(std::size_t first,
                                                               std::size_t count,
                                                               std::size_t factor) const {
  const GaussianLadder ladder =
      build_ladder(algebra_, base_masses_, control_, options_.hermitian, factor);
  const AtomAlgebra& fine = ladder.algebras.back();
  std::vector<RandomElement> values(fine.atom_count(), RandomElement::zero(count));
  detail::parallel_for(
      count,
      [&](std::size_t begin, std::size_t end) {
        std::vector<Complex> current, next;
        for (std::size_t k = begin; k < end; ++k) {
          draw_on_ladder(ladder, seed_, first + k, options_.hermitian, current, next);
          for (std::size_t j = 0; j < current.size(); ++j) values[j][k] = current[j];
        }
      },
      64);
  return {fine, ScenarioModel::ensemble(count, seed_), std::move(values)};
}

OrthogonalStochasticMeasure gaussian_measure(const AtomAlgebra& algebra,
                                             const StructuralMeasure& control, std::size_t K,
                                             std::uint64_t seed, GaussianOptions options) {
  if (K < 2) throw ArgumentError(fmt::format("Gaussian measure needs K >= 2, got {}", K));
  GaussianMeasureGenerator generator(algebra, control, seed, options);
  OrthogonalStochasticMeasure base = generator.generate(0, K, 1);
  return {base.algebra(), base.model(),
          std::vector<RandomElement>(base.atom_values().begin(), base.atom_values().end()),
          std::make_shared<GaussianFamily>(std::move(generator), K)};
}

OrthogonalStochasticMeasure gaussian_measure(const AtomAlgebra& algebra, ControlMass control,
                                             std::size_t K, std::uint64_t seed,
                                             GaussianOptions options) {
  if (K < 2) throw ArgumentError(fmt::format("Gaussian measure needs K >= 2, got {}", K));
  GaussianMeasureGenerator generator(algebra, std::move(control), seed, options);
  OrthogonalStochasticMeasure base = generator.generate(0, K, 1);
  return {base.algebra(), base.model(),
          std::vector<RandomElement>(base.atom_values().begin(), base.atom_values().end()),
          std::make_shared<GaussianFamily>(std::move(generator), K)};
}

// --- axiom validation -------------------------------------------------------------

AxiomTolerance AxiomTolerance::for_model(const ScenarioModel& model) {
  if (model.mode() == Mode::exact) return {0.0, 0.0};
  return {0.0, 5.0};
}

AxiomReport validate_axioms(const OrthogonalStochasticMeasure& measure, AxiomTolerance tol) {
  if (!(tol.absolute >= 0.0) || !(tol.clt_factor >= 0.0))
    throw ArgumentError("axiom tolerances must be nonnegative");
  AxiomReport report;
  const auto& model = measure.model();
  const std::size_t atoms = measure.algebra().atom_count();
  const double K = static_cast<double>(model.size());

  // i) M(empty) = 0
  const RandomElement empty = measure.evaluate(measure.algebra().empty_set());
  for (std::size_t k = 0; k < empty.size(); ++k)
    report.empty_set_residual = std::max(report.empty_set_residual, std::abs(empty[k]));
  if (report.empty_set_residual > tol.absolute)
    report.violations.push_back(
        {Axiom::empty_set, 0, 0, report.empty_set_residual, tol.absolute});

  // ii) E M(A1) conj M(A2) = 0 for disjoint atoms; unions follow bilinearly.
  std::vector<double> masses(atoms);
  for (std::size_t j = 0; j < atoms; ++j) masses[j] = mean_square(model, measure.atom_value(j));

  struct RowResult {
    std::vector<AxiomViolation> violations;
    double max_residual = 0.0;
    double max_ratio = 0.0;
  };
  std::vector<RowResult> rows(atoms);
  detail::parallel_for(atoms, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      RowResult& row = rows[i];
      for (std::size_t j = i + 1; j < atoms; ++j) {
        const double residual =
            std::abs(inner_product(model, measure.atom_value(i), measure.atom_value(j)));
        const double threshold =
            tol.absolute + tol.clt_factor * std::sqrt(masses[i] * masses[j] / K);
        const double ratio = threshold > 0.0 ? residual / threshold
                             : residual > 0.0 ? std::numeric_limits<double>::infinity()
                                              : 0.0;
        row.max_residual = std::max(row.max_residual, residual);
        row.max_ratio = std::max(row.max_ratio, ratio);
        if (residual > threshold)
          row.violations.push_back({Axiom::orthogonality, i, j, residual, threshold});
      }
    }
  });
  for (auto& row : rows) {
    report.max_orthogonality_residual = std::max(report.max_orthogonality_residual, row.max_residual);
    report.max_orthogonality_ratio = std::max(report.max_orthogonality_ratio, row.max_ratio);
    report.violations.insert(report.violations.end(), row.violations.begin(), row.violations.end());
  }
  report.pairs_checked = atoms * (atoms - 1) / 2;

  // iii) the exhausting partial sums over atoms reach M(S) in L2.
  RandomElement partial = RandomElement::zero(model.size());
  for (std::size_t j = 0; j < atoms; ++j) partial += measure.atom_value(j);
  report.additivity_gap =
      mean_square(model, measure.evaluate(measure.algebra().full_set()) - partial);
  if (report.additivity_gap > tol.absolute)
    report.violations.push_back(
        {Axiom::countable_additivity, 0, atoms, report.additivity_gap, tol.absolute});
  return report;
}

AxiomReport validate_axioms(const OrthogonalStochasticMeasure& measure, double tol) {
  return validate_axioms(measure, AxiomTolerance{tol, 0.0});
}

AxiomReport validate_axioms(const OrthogonalStochasticMeasure& measure) {
  return validate_axioms(measure, AxiomTolerance::for_model(measure.model()));
}

}  // namespace orthomeasure
