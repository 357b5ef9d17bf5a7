#ifndef ORTHOMEASURE_INTEGRATION_HPP
#define ORTHOMEASURE_INTEGRATION_HPP

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "orthomeasure/probability.hpp"
#include "orthomeasure/set_system.hpp"
#include "orthomeasure/stochastic_measure.hpp"

namespace orthomeasure {

/// f = sum_j a_j 1_{atom j}: one complex coefficient per atom.
class SimpleFunction {
 public:
  SimpleFunction(AtomAlgebra algebra, std::vector<Complex> coeffs);

  static SimpleFunction zero(const AtomAlgebra& algebra);
  static SimpleFunction constant(const AtomAlgebra& algebra, Complex value);
  static SimpleFunction indicator(const AlgebraSet& set, Complex value = 1.0);

  const AtomAlgebra& algebra() const noexcept { return algebra_; }
  std::span<const Complex> coeffs() const noexcept { return coeffs_; }
  Complex coeff(std::size_t atom) const { return coeffs_[atom]; }

  /// The same function on a refinement of its algebra.
  SimpleFunction lifted(const Refinement& refinement) const;
  SimpleFunction conj() const;
  /// Coefficients |a_j|^2.
  std::vector<double> squared_moduli() const;

  SimpleFunction& operator+=(const SimpleFunction& other);
  SimpleFunction& operator-=(const SimpleFunction& other);
  SimpleFunction& operator*=(Complex scale);
  /// Pointwise product.
  SimpleFunction& operator*=(const SimpleFunction& other);

  friend SimpleFunction operator+(SimpleFunction a, const SimpleFunction& b) { return a += b; }
  friend SimpleFunction operator-(SimpleFunction a, const SimpleFunction& b) { return a -= b; }
  friend SimpleFunction operator*(SimpleFunction a, const SimpleFunction& b) { return a *= b; }
  friend SimpleFunction operator*(Complex s, SimpleFunction a) { return a *= s; }
  friend SimpleFunction operator*(SimpleFunction a, Complex s) { return a *= s; }

 private:
  AtomAlgebra algebra_;
  std::vector<Complex> coeffs_;
};

/// A general integrand lambda -> f(lambda) on an interval ground set.
struct Integrand {
  std::function<Complex(double)> evaluate;
  /// Caller's claim that f is square-integrable; integrate_l2 refuses otherwise.
  bool declared_l2 = true;

  Complex operator()(double x) const { return evaluate(x); }

  /// lambda -> e^{i lambda n}
  static Integrand exponential(double n);
  static Integrand constant(Complex value);
  /// Piecewise-constant function given by a simple function on an interval
  /// algebra; zero outside its atoms.
  static Integrand from_simple(const SimpleFunction& f);
  /// Pointwise product.
  static Integrand product(Integrand f, Integrand g);
};

/// sum_j a_j M(atom j)
RandomElement integrate_simple(const SimpleFunction& f, const OrthogonalStochasticMeasure& measure);

/// sqrt(sum_j |a_j|^2 m_j)
double l2_norm_simple(const SimpleFunction& f, const StructuralMeasure& structural);

/// sum_j f_j conj(g_j) m_j
Complex inner_product_simple(const SimpleFunction& f, const SimpleFunction& g,
                             const StructuralMeasure& structural);

/// Two sides of an identity and the modulus of their difference.
struct IdentityCheck {
  Complex lhs;
  Complex rhs;
  double gap = 0.0;
};

/// lhs = E (int f dM) conj(int g dM); rhs = sum_j f_j conj(g_j) E|M(atom j)|^2.
IdentityCheck isometry_check(const SimpleFunction& f, const SimpleFunction& g,
                             const OrthogonalStochasticMeasure& measure);

/// Midpoint projection of f onto refine(algebra, factor).fine.
SimpleFunction project_to_simple(const Integrand& f, const AtomAlgebra& algebra,
                                 std::size_t factor);

/// Dyadic level schedule for integrate_l2: levels first, first+step, ...
struct LevelSchedule {
  unsigned max_level = 10;
  unsigned first_level = 0;
  unsigned step = 1;
};

struct L2Integral {
  RandomElement value;
  unsigned achieved_level = 0;
  /// |f_{next} - f_level|_{L2(M)} for every level tried, in order.
  std::vector<double> cauchy_gaps;
  bool converged = false;
};

/**
 * L2 extension of the integral: projects f at dyadic refinement levels of the
 * measure's algebra and stops at the first level whose Cauchy gap to the next
 * scheduled level, measured in L2 of the measure's reference structure, is
 * below target_eps. Returns the integral of that level's projection.
 *
 * When no level converges, the result holds the integral at the last level
 * with converged == false.
 */
L2Integral integrate_l2(const Integrand& f, const OrthogonalStochasticMeasure& measure,
                        double target_eps, LevelSchedule schedule = {});

/// Per-atom integrals int 1_{atom j} f dM computed by one integrate_l2 pass.
struct L2AtomIntegrals {
  std::vector<RandomElement> atom_integrals;
  unsigned achieved_level = 0;
  std::vector<double> cauchy_gaps;
  bool converged = false;
  SimpleFunction projection;          ///< f at the achieved resolution
  StructuralMeasure resolution_structure;  ///< empirical masses at that resolution
};

L2AtomIntegrals integrate_l2_by_atom(const Integrand& f, const OrthogonalStochasticMeasure& measure,
                                     double target_eps, LevelSchedule schedule = {});

}  // namespace orthomeasure

#endif  // ORTHOMEASURE_INTEGRATION_HPP
