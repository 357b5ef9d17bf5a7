#include "orthomeasure/set_system.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "orthomeasure/error.hpp"

namespace orthomeasure {

struct AtomAlgebra::Data {
  std::size_t atom_count = 0;
  std::vector<Interval> intervals;            // empty unless interval-labelled
  std::vector<Interval> pi_units;             // exact dyadic endpoints / pi, when known
  std::vector<std::size_t> interval_order;    // atom indices sorted by lower bound
  std::size_t ground_size = 0;                // cell algebras only
  std::vector<std::vector<std::size_t>> cells;
  std::vector<std::size_t> atom_of_ground;

  friend bool operator==(const Data& a, const Data& b) {
    return a.atom_count == b.atom_count && a.intervals == b.intervals &&
           a.ground_size == b.ground_size && a.cells == b.cells;
  }
};

AtomAlgebra AtomAlgebra::from_cells(std::size_t ground_size,
                                    std::vector<std::vector<std::size_t>> cells) {
  if (cells.empty()) throw ConstructionError("algebra needs at least one atom");
  constexpr std::size_t kUnassigned = static_cast<std::size_t>(-1);
  std::vector<std::size_t> owner(ground_size, kUnassigned);
  for (std::size_t j = 0; j < cells.size(); ++j) {
    if (cells[j].empty()) throw ConstructionError(fmt::format("atom {} is empty", j));
    for (std::size_t point : cells[j]) {
      if (point >= ground_size)
        throw ConstructionError(
            fmt::format("atom {} contains point {} outside the ground set of size {}", j, point,
                        ground_size));
      if (owner[point] != kUnassigned)
        throw ConstructionError(
            fmt::format("atoms {} and {} overlap at point {}", owner[point], j, point));
      owner[point] = j;
    }
  }
  for (std::size_t point = 0; point < ground_size; ++point)
    if (owner[point] == kUnassigned)
      throw ConstructionError(fmt::format("ground point {} is not covered by any atom", point));

  auto data = std::make_shared<Data>();
  data->atom_count = cells.size();
  data->ground_size = ground_size;
  data->cells = std::move(cells);
  data->atom_of_ground = std::move(owner);
  return AtomAlgebra(std::move(data));
}

AtomAlgebra AtomAlgebra::singletons(std::size_t ground_size) {
  std::vector<std::vector<std::size_t>> cells(ground_size);
  for (std::size_t i = 0; i < ground_size; ++i) cells[i] = {i};
  return from_cells(ground_size, std::move(cells));
}

AtomAlgebra AtomAlgebra::from_intervals(std::vector<Interval> atoms) {
  if (atoms.empty()) throw ConstructionError("algebra needs at least one atom");
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    const auto& a = atoms[j];
    if (!(a.lower < a.upper))
      throw ConstructionError(
          fmt::format("atom {} = [{}, {}) is empty or reversed", j, a.lower, a.upper));
    if (a.lower < kSpectralDomain.lower || a.upper > kSpectralDomain.upper)
      throw ConstructionError(
          fmt::format("atom {} = [{}, {}) leaves [-pi, pi)", j, a.lower, a.upper));
  }
  std::vector<std::size_t> order(atoms.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return atoms[a].lower < atoms[b].lower; });
  for (std::size_t i = 1; i < order.size(); ++i) {
    const auto& prev = atoms[order[i - 1]];
    const auto& next = atoms[order[i]];
    if (next.lower < prev.upper)
      throw ConstructionError(
          fmt::format("atoms {} and {} overlap", order[i - 1], order[i]));
  }
  auto data = std::make_shared<Data>();
  data->atom_count = atoms.size();
  data->intervals = std::move(atoms);
  data->interval_order = std::move(order);
  return AtomAlgebra(std::move(data));
}

// Unit endpoints t in [-1, 1] are exact dyadic rationals; the radian endpoint
// is pi * t with a single rounding, so an endpoint reached by different
// refinement paths is bit-identical.
AtomAlgebra AtomAlgebra::with_pi_units(std::vector<Interval> units) {
  std::vector<Interval> atoms(units.size());
  for (std::size_t j = 0; j < units.size(); ++j)
    atoms[j] = {std::numbers::pi * units[j].lower, std::numbers::pi * units[j].upper};
  AtomAlgebra algebra = from_intervals(std::move(atoms));
  auto data = std::make_shared<Data>(*algebra.data_);
  data->pi_units = std::move(units);
  return AtomAlgebra(std::move(data));
}

AtomAlgebra AtomAlgebra::dyadic(unsigned level) {
  if (level > 24) throw ArgumentError(fmt::format("dyadic level {} is too fine", level));
  const std::size_t n = std::size_t{1} << level;
  const double step = 2.0 / static_cast<double>(n);
  std::vector<Interval> units(n);
  for (std::size_t j = 0; j < n; ++j)
    units[j] = {-1.0 + static_cast<double>(j) * step, -1.0 + static_cast<double>(j + 1) * step};
  return with_pi_units(std::move(units));
}

AtomAlgebra AtomAlgebra::abstract(std::size_t atom_count) {
  if (atom_count == 0) throw ConstructionError("algebra needs at least one atom");
  auto data = std::make_shared<Data>();
  data->atom_count = atom_count;
  return AtomAlgebra(std::move(data));
}

std::size_t AtomAlgebra::atom_count() const noexcept { return data_->atom_count; }

std::uint64_t AtomAlgebra::set_count() const {
  if (atom_count() > 63)
    throw ArgumentError(fmt::format("2^{} sets do not fit in 64 bits", atom_count()));
  return std::uint64_t{1} << atom_count();
}

bool AtomAlgebra::has_intervals() const noexcept { return !data_->intervals.empty(); }

std::span<const Interval> AtomAlgebra::intervals() const {
  if (!has_intervals()) throw UnsupportedError("algebra has no interval labels");
  return data_->intervals;
}

const Interval& AtomAlgebra::interval(std::size_t atom) const { return intervals()[atom]; }

std::optional<std::size_t> AtomAlgebra::locate(double x) const {
  const auto& iv = intervals();
  const auto& order = data_->interval_order;
  // Last atom (in lower-bound order) with lower <= x.
  auto it = std::upper_bound(order.begin(), order.end(), x,
                             [&](double value, std::size_t atom) { return value < iv[atom].lower; });
  if (it == order.begin()) return std::nullopt;
  const std::size_t atom = *std::prev(it);
  if (iv[atom].contains(x)) return atom;
  return std::nullopt;
}

bool AtomAlgebra::has_cells() const noexcept { return !data_->cells.empty(); }
std::size_t AtomAlgebra::ground_size() const noexcept { return data_->ground_size; }

std::span<const std::size_t> AtomAlgebra::cell(std::size_t atom) const {
  if (!has_cells()) throw UnsupportedError("algebra has no ground-point cells");
  return data_->cells[atom];
}

std::span<const std::size_t> AtomAlgebra::atom_of_ground() const {
  if (!has_cells()) throw UnsupportedError("algebra has no ground-point cells");
  return data_->atom_of_ground;
}

AlgebraSet AtomAlgebra::empty_set() const {
  return AlgebraSet(*this, std::vector<bool>(atom_count(), false));
}

AlgebraSet AtomAlgebra::full_set() const {
  return AlgebraSet(*this, std::vector<bool>(atom_count(), true));
}

AlgebraSet AtomAlgebra::atom_set(std::size_t atom) const {
  if (atom >= atom_count())
    throw ArgumentError(fmt::format("atom {} out of range ({} atoms)", atom, atom_count()));
  std::vector<bool> mask(atom_count(), false);
  mask[atom] = true;
  return AlgebraSet(*this, std::move(mask));
}

AlgebraSet AtomAlgebra::make_set(std::span<const std::size_t> atoms) const {
  std::vector<bool> mask(atom_count(), false);
  for (std::size_t atom : atoms) {
    if (atom >= atom_count())
      throw ArgumentError(fmt::format("atom {} out of range ({} atoms)", atom, atom_count()));
    mask[atom] = true;
  }
  return AlgebraSet(*this, std::move(mask));
}

AlgebraSet AtomAlgebra::from_mask(std::uint64_t bits) const {
  if (atom_count() < 64 && (bits >> atom_count()) != 0)
    throw ArgumentError("mask has bits beyond the atom count");
  std::vector<bool> mask(atom_count(), false);
  for (std::size_t j = 0; j < atom_count() && j < 64; ++j) mask[j] = ((bits >> j) & 1U) != 0;
  return AlgebraSet(*this, std::move(mask));
}

bool operator==(const AtomAlgebra& a, const AtomAlgebra& b) {
  return a.data_ == b.data_ || *a.data_ == *b.data_;
}

void require_same_algebra(const AtomAlgebra& a, const AtomAlgebra& b) {
  if (!(a == b))
    throw AlgebraMismatchError(fmt::format(
        "operands belong to different algebras ({} vs {} atoms)", a.atom_count(), b.atom_count()));
}

// --- AlgebraSet -----------------------------------------------------------

AlgebraSet::AlgebraSet(AtomAlgebra algebra, std::vector<bool> mask)
    : algebra_(std::move(algebra)), mask_(std::move(mask)) {
  if (mask_.size() != algebra_.atom_count())
    throw DimensionError(fmt::format("set mask has {} entries for {} atoms", mask_.size(),
                                     algebra_.atom_count()));
}

std::size_t AlgebraSet::size() const noexcept {
  return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), true));
}

bool AlgebraSet::empty() const noexcept {
  return std::none_of(mask_.begin(), mask_.end(), [](bool b) { return b; });
}

std::vector<std::size_t> AlgebraSet::atoms() const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < mask_.size(); ++j)
    if (mask_[j]) out.push_back(j);
  return out;
}

bool AlgebraSet::is_subset_of(const AlgebraSet& other) const {
  require_same_algebra(algebra_, other.algebra_);
  for (std::size_t j = 0; j < mask_.size(); ++j)
    if (mask_[j] && !other.mask_[j]) return false;
  return true;
}

bool AlgebraSet::disjoint_from(const AlgebraSet& other) const {
  require_same_algebra(algebra_, other.algebra_);
  for (std::size_t j = 0; j < mask_.size(); ++j)
    if (mask_[j] && other.mask_[j]) return false;
  return true;
}

namespace {

template <class Op>
AlgebraSet combine_sets(const AlgebraSet& a, const AlgebraSet& b, Op op) {
  require_same_algebra(a.algebra(), b.algebra());
  std::vector<bool> mask(a.atom_count());
  for (std::size_t j = 0; j < mask.size(); ++j) mask[j] = op(a.contains(j), b.contains(j));
  return AlgebraSet(a.algebra(), std::move(mask));
}

}  // namespace

AlgebraSet unite(const AlgebraSet& a, const AlgebraSet& b) {
  return combine_sets(a, b, [](bool x, bool y) { return x || y; });
}
AlgebraSet intersect(const AlgebraSet& a, const AlgebraSet& b) {
  return combine_sets(a, b, [](bool x, bool y) { return x && y; });
}
AlgebraSet difference(const AlgebraSet& a, const AlgebraSet& b) {
  return combine_sets(a, b, [](bool x, bool y) { return x && !y; });
}
AlgebraSet sym_diff(const AlgebraSet& a, const AlgebraSet& b) {
  return combine_sets(a, b, [](bool x, bool y) { return x != y; });
}
AlgebraSet complement(const AlgebraSet& a) {
  std::vector<bool> mask(a.mask_);
  mask.flip();
  return AlgebraSet(a.algebra_, std::move(mask));
}

bool operator==(const AlgebraSet& a, const AlgebraSet& b) {
  return a.algebra_ == b.algebra_ && a.mask_ == b.mask_;
}

// --- refinement -------------------------------------------------------------

Refinement refine(const AtomAlgebra& algebra, std::size_t factor) {
  if (!algebra.has_intervals())
    throw UnsupportedError("refinement needs an interval-labelled algebra");
  if (factor == 0) throw ArgumentError("refinement factor must be positive");
  if (factor == 1) {
    std::vector<std::size_t> parent(algebra.atom_count());
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    return {algebra, algebra, 1, std::move(parent)};
  }
  if (algebra.data_->pi_units.size() == algebra.atom_count() &&
      std::has_single_bit(factor)) {
    const auto& units = algebra.data_->pi_units;
    std::vector<Interval> fine_units;
    std::vector<std::size_t> parent;
    fine_units.reserve(units.size() * factor);
    parent.reserve(units.size() * factor);
    const double n = static_cast<double>(factor);
    for (std::size_t j = 0; j < units.size(); ++j) {
      const auto [lo, hi] = units[j];
      const double width = hi - lo;
      for (std::size_t r = 0; r < factor; ++r) {
        fine_units.push_back({lo + width * (static_cast<double>(r) / n),
                              r + 1 == factor ? hi : lo + width * (static_cast<double>(r + 1) / n)});
        parent.push_back(j);
      }
    }
    return {algebra, AtomAlgebra::with_pi_units(std::move(fine_units)), factor, std::move(parent)};
  }
  const auto coarse = algebra.intervals();
  std::vector<Interval> fine;
  std::vector<std::size_t> parent;
  fine.reserve(coarse.size() * factor);
  parent.reserve(coarse.size() * factor);
  const double n = static_cast<double>(factor);
  for (std::size_t j = 0; j < coarse.size(); ++j) {
    const auto [lo, hi] = coarse[j];
    const double width = hi - lo;
    for (std::size_t r = 0; r < factor; ++r) {
      const double a = r == 0 ? lo : lo + width * (static_cast<double>(r) / n);
      const double b = r + 1 == factor ? hi : lo + width * (static_cast<double>(r + 1) / n);
      fine.push_back({a, b});
      parent.push_back(j);
    }
  }
  return {algebra, AtomAlgebra::from_intervals(std::move(fine)), factor, std::move(parent)};
}

AlgebraSet Refinement::lift(const AlgebraSet& coarse_set) const {
  require_same_algebra(coarse_set.algebra(), coarse);
  std::vector<bool> mask(fine.atom_count());
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = coarse_set.contains(parent[i]);
  return AlgebraSet(fine, std::move(mask));
}

AlgebraSet embed(const AlgebraSet& set, const AtomAlgebra& finer) {
  if (set.algebra() == finer) return set;
  const AtomAlgebra& coarse = set.algebra();
  if (!coarse.has_intervals() || !finer.has_intervals())
    throw UnsupportedError("embedding between different algebras needs interval labels");
  std::vector<bool> mask(finer.atom_count());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    const Interval& atom = finer.interval(i);
    const auto owner = coarse.locate(atom.lower);
    if (!owner || !coarse.interval(*owner).contains(atom))
      throw ArgumentError(fmt::format(
          "atom [{}, {}) of the target algebra is not inside a single atom of the source",
          atom.lower, atom.upper));
    mask[i] = set.contains(*owner);
  }
  return AlgebraSet(finer, std::move(mask));
}

// --- countable-union approximation -------------------------------------------

UnionApproximation approximate_countable_union(const SetStream& stream, const SetMass& mass,
                                               double eps, std::size_t max_terms) {
  if (!(eps > 0.0)) throw ArgumentError(fmt::format("eps must be positive, got {}", eps));

  // Consume until the stream ends or adding further terms leaves the partial
  // sum unchanged for a run of kStableRun consecutive terms.
  constexpr std::size_t kStableRun = 64;
  std::vector<AlgebraSet> sets;
  std::vector<double> masses;
  std::optional<AlgebraSet> covered;
  double partial = 0.0;
  std::size_t stable = 0;
  bool finished = false;
  while (!finished) {
    if (sets.size() >= max_terms)
      throw DivergenceError(fmt::format(
          "union masses still accumulating after {} terms (partial sum {:.17g})", max_terms,
          partial));
    auto next = stream();
    if (!next) break;
    const double m = mass(*next);
    if (!(m >= 0.0) || !std::isfinite(m))
      throw ArgumentError(fmt::format("term {} has invalid mass {}", sets.size() + 1, m));
    if (covered) {
      AlgebraSet previous = embed(*covered, next->algebra());
      if (!previous.disjoint_from(*next))
        throw ArgumentError(
            fmt::format("term {} overlaps an earlier term of the union", sets.size() + 1));
      covered = unite(previous, *next);
    } else {
      covered = *next;
    }
    const double updated = partial + m;
    stable = (updated == partial) ? stable + 1 : 0;
    partial = updated;
    sets.push_back(std::move(*next));
    masses.push_back(m);
    finished = stable >= kStableRun;
  }
  if (sets.empty()) throw ArgumentError("countable union stream is empty");

  // tail[n] = sum of masses of terms n+1, n+2, ... (1-based terms).
  const std::size_t total = sets.size();
  std::vector<double> tail(total + 1, 0.0);
  for (std::size_t n = total; n-- > 0;) tail[n] = tail[n + 1] + masses[n];

  std::size_t terms = 0;
  while (terms < total && !(tail[terms] < eps)) ++terms;

  const AtomAlgebra& target = sets[terms == 0 ? 0 : terms - 1].algebra();
  AlgebraSet result = target.empty_set();
  for (std::size_t n = 0; n < terms; ++n) result = unite(result, embed(sets[n], target));
  return {std::move(result), terms, tail[terms], total};
}

UnionApproximation approximate_algebra_set(const AlgebraSet& target, const SetMass& mass,
                                           double eps) {
  const auto atoms = target.atoms();
  const AtomAlgebra& algebra = target.algebra();
  if (atoms.empty()) {
    if (!(eps > 0.0)) throw ArgumentError(fmt::format("eps must be positive, got {}", eps));
    return {algebra.empty_set(), 0, 0.0, 0};
  }
  std::size_t next = 0;
  SetStream stream = [&]() -> std::optional<AlgebraSet> {
    if (next == atoms.size()) return std::nullopt;
    return algebra.atom_set(atoms[next++]);
  };
  return approximate_countable_union(stream, mass, eps);
}

}  // namespace orthomeasure
