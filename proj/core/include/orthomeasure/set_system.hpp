#ifndef ORTHOMEASURE_SET_SYSTEM_HPP
#define ORTHOMEASURE_SET_SYSTEM_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace orthomeasure {

/// Half-open interval [lower, upper) in radians.
struct Interval {
  double lower = 0.0;
  double upper = 0.0;

  double width() const noexcept { return upper - lower; }
  /// Negating both endpoints negates the midpoint exactly.
  double midpoint() const noexcept { return 0.5 * (lower + upper); }
  bool contains(double x) const noexcept { return lower <= x && x < upper; }
  bool contains(const Interval& other) const noexcept {
    return lower <= other.lower && other.upper <= upper;
  }

  friend bool operator==(const Interval&, const Interval&) = default;
};

/// The spectral ground set [-pi, pi).
inline constexpr Interval kSpectralDomain{-std::numbers::pi, std::numbers::pi};

class AlgebraSet;
struct Refinement;

/**
 * A finite partition of a ground set S into atoms. The generated algebra
 * consists of all unions of atoms and, being finite, is its own sigma-algebra.
 *
 * Atoms are either cells of ground indices {0, ..., n-1} (used for scenario
 * index sets) or half-open intervals inside [-pi, pi) (the spectral backend).
 * Copies share their storage; equality is structural.
 */
class AtomAlgebra {
 public:
  /// Cells must be nonempty, pairwise disjoint and cover {0, ..., ground_size-1}.
  static AtomAlgebra from_cells(std::size_t ground_size,
                                std::vector<std::vector<std::size_t>> cells);
  /// One atom per ground point.
  static AtomAlgebra singletons(std::size_t ground_size);
  /// Intervals must satisfy lower < upper, be pairwise disjoint and lie in
  /// [-pi, pi). Their union is taken as the ground set.
  static AtomAlgebra from_intervals(std::vector<Interval> atoms);
  /// [-pi, pi) split into 2^level equal atoms, ordered left to right.
  static AtomAlgebra dyadic(unsigned level);
  /// Intervals given in units of pi, i.e. atom j is [pi t_lo, pi t_hi).
  /// Refinement by powers of two keeps the unit endpoints exact.
  static AtomAlgebra with_pi_units(std::vector<Interval> units);
  /// n atoms without any ground-set labels.
  static AtomAlgebra abstract(std::size_t atom_count);

  std::size_t atom_count() const noexcept;
  /// Number of sets in the algebra (2^atoms); throws past 63 atoms.
  std::uint64_t set_count() const;

  bool has_intervals() const noexcept;
  std::span<const Interval> intervals() const;
  const Interval& interval(std::size_t atom) const;
  /// Atom whose interval contains x, if any.
  std::optional<std::size_t> locate(double x) const;

  bool has_cells() const noexcept;
  std::size_t ground_size() const noexcept;
  std::span<const std::size_t> cell(std::size_t atom) const;
  /// Atom index of every ground point (cell algebras only).
  std::span<const std::size_t> atom_of_ground() const;

  AlgebraSet empty_set() const;
  AlgebraSet full_set() const;
  AlgebraSet atom_set(std::size_t atom) const;
  AlgebraSet make_set(std::span<const std::size_t> atoms) const;
  /// Set from the low bits of a mask (atom j present iff bit j set).
  AlgebraSet from_mask(std::uint64_t mask) const;

  friend bool operator==(const AtomAlgebra& a, const AtomAlgebra& b);
  friend Refinement refine(const AtomAlgebra& algebra, std::size_t factor);

 private:
  struct Data;
  explicit AtomAlgebra(std::shared_ptr<const Data> data) : data_(std::move(data)) {}

  std::shared_ptr<const Data> data_;
};

/// A union of atoms of one AtomAlgebra, stored as an atom mask.
class AlgebraSet {
 public:
  AlgebraSet(AtomAlgebra algebra, std::vector<bool> mask);

  const AtomAlgebra& algebra() const noexcept { return algebra_; }
  std::size_t atom_count() const noexcept { return mask_.size(); }
  bool contains(std::size_t atom) const { return mask_[atom]; }
  std::size_t size() const noexcept;
  bool empty() const noexcept;
  std::vector<std::size_t> atoms() const;
  const std::vector<bool>& mask() const noexcept { return mask_; }
  bool is_subset_of(const AlgebraSet& other) const;
  bool disjoint_from(const AlgebraSet& other) const;

  friend AlgebraSet unite(const AlgebraSet& a, const AlgebraSet& b);
  friend AlgebraSet intersect(const AlgebraSet& a, const AlgebraSet& b);
  friend AlgebraSet difference(const AlgebraSet& a, const AlgebraSet& b);
  friend AlgebraSet sym_diff(const AlgebraSet& a, const AlgebraSet& b);
  friend AlgebraSet complement(const AlgebraSet& a);

  friend AlgebraSet operator|(const AlgebraSet& a, const AlgebraSet& b) { return unite(a, b); }
  friend AlgebraSet operator&(const AlgebraSet& a, const AlgebraSet& b) { return intersect(a, b); }
  friend AlgebraSet operator-(const AlgebraSet& a, const AlgebraSet& b) { return difference(a, b); }
  friend AlgebraSet operator^(const AlgebraSet& a, const AlgebraSet& b) { return sym_diff(a, b); }
  friend AlgebraSet operator~(const AlgebraSet& a) { return complement(a); }

  friend bool operator==(const AlgebraSet& a, const AlgebraSet& b);

 private:
  AtomAlgebra algebra_;
  std::vector<bool> mask_;
};

/// Throws AlgebraMismatchError unless both algebras are equal.
void require_same_algebra(const AtomAlgebra& a, const AtomAlgebra& b);

/// Result of splitting every atom of an interval algebra into `factor` parts.
/// Fine atom `coarse * factor + r` is the r-th piece of coarse atom `coarse`.
struct Refinement {
  AtomAlgebra coarse;
  AtomAlgebra fine;
  std::size_t factor = 1;
  std::vector<std::size_t> parent;

  std::size_t first_child(std::size_t coarse_atom) const noexcept {
    return coarse_atom * factor;
  }
  /// The same union of points expressed on the fine algebra.
  AlgebraSet lift(const AlgebraSet& coarse_set) const;
};

/// Requires interval labels; factor >= 1.
Refinement refine(const AtomAlgebra& algebra, std::size_t factor);

/**
 * Express `set` on an interval algebra that refines its own: every atom of
 * `finer` must lie inside a single atom of `set.algebra()`.
 */
AlgebraSet embed(const AlgebraSet& set, const AtomAlgebra& finer);

/// Yields B_1, B_2, ... in order; nullopt ends a finite stream.
using SetStream = std::function<std::optional<AlgebraSet>()>;
/// Finitely additive nonnegative set function.
using SetMass = std::function<double(const AlgebraSet&)>;

struct UnionApproximation {
  AlgebraSet set;             ///< A = B_1 u ... u B_N, on the algebra of B_max(N,1)
  std::size_t terms = 0;      ///< N
  double residual = 0.0;      ///< sum_{n>N} mass(B_n) = mass(A sym-diff union B_n)
  std::size_t inspected = 0;  ///< number of stream elements consumed
};

/**
 * Truncate a countable disjoint union B_1 u B_2 u ... to the shortest prefix
 * whose tail mass is below eps.
 *
 * The stream is consumed until it ends or its partial mass sums stop changing
 * in floating point; the tail sums are then accumulated from the back. A
 * stream still contributing mass after `max_terms` elements is reported as
 * divergent. Successive sets may live on successively finer interval
 * algebras.
 */
UnionApproximation approximate_countable_union(const SetStream& stream, const SetMass& mass,
                                               double eps, std::size_t max_terms = 4096);

/// The same truncation for a set already in the algebra, streamed atom by atom.
UnionApproximation approximate_algebra_set(const AlgebraSet& target, const SetMass& mass,
                                           double eps);

}  // namespace orthomeasure

#endif  // ORTHOMEASURE_SET_SYSTEM_HPP
