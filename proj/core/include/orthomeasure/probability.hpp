#ifndef ORTHOMEASURE_PROBABILITY_HPP
#define ORTHOMEASURE_PROBABILITY_HPP

#include <complex>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace orthomeasure {

using Complex = std::complex<double>;

/// Exact finite probability space or uniformly weighted Monte Carlo ensemble.
enum class Mode { exact, ensemble };

std::string_view to_string(Mode mode) noexcept;
std::optional<Mode> parse_mode(std::string_view text) noexcept;

/**
 * A weighted finite set of scenarios standing in for (Omega, P).
 *
 * In exact mode the weights are arbitrary probabilities; in ensemble mode they
 * are forced to 1/K and the model remembers the seed that produced its
 * samples. Copies share the weight vector.
 */
class ScenarioModel {
 public:
  /// Weights must be nonnegative and sum to 1 within 1e-12.
  static ScenarioModel exact(std::vector<double> weights);
  /// Exact model with K equally likely scenarios.
  static ScenarioModel uniform(std::size_t size);
  static ScenarioModel ensemble(std::size_t size, std::uint64_t seed);

  std::size_t size() const noexcept { return weights_->size(); }
  std::span<const double> weights() const noexcept { return *weights_; }
  double weight(std::size_t k) const { return (*weights_)[k]; }
  Mode mode() const noexcept { return mode_; }
  std::uint64_t seed() const noexcept { return seed_; }

  friend bool operator==(const ScenarioModel& a, const ScenarioModel& b);

 private:
  ScenarioModel(std::shared_ptr<const std::vector<double>> weights, Mode mode,
                std::uint64_t seed);

  std::shared_ptr<const std::vector<double>> weights_;
  Mode mode_;
  std::uint64_t seed_;
};

/// A complex value per scenario: an element of L2(P) on a ScenarioModel.
class RandomElement {
 public:
  RandomElement() = default;
  explicit RandomElement(std::vector<Complex> values) : values_(std::move(values)) {}

  static RandomElement zero(std::size_t size) {
    return RandomElement(std::vector<Complex>(size));
  }
  static RandomElement constant(std::size_t size, Complex value) {
    return RandomElement(std::vector<Complex>(size, value));
  }

  std::size_t size() const noexcept { return values_.size(); }
  std::span<const Complex> values() const noexcept { return values_; }
  std::span<Complex> values() noexcept { return values_; }
  Complex operator[](std::size_t k) const { return values_[k]; }
  Complex& operator[](std::size_t k) { return values_[k]; }

  RandomElement& operator+=(const RandomElement& other);
  RandomElement& operator-=(const RandomElement& other);
  RandomElement& operator*=(Complex scale);
  /// this += scale * other
  RandomElement& add_scaled(Complex scale, const RandomElement& other);

  RandomElement conj() const;

  friend RandomElement operator+(RandomElement a, const RandomElement& b) { return a += b; }
  friend RandomElement operator-(RandomElement a, const RandomElement& b) { return a -= b; }
  friend RandomElement operator*(Complex s, RandomElement a) { return a *= s; }
  friend RandomElement operator*(RandomElement a, Complex s) { return a *= s; }

  friend bool operator==(const RandomElement&, const RandomElement&) = default;

 private:
  std::vector<Complex> values_;
};

/// Sum_k w_k x_k.
Complex expectation(const ScenarioModel& model, const RandomElement& x);

/// Sum_k w_k x_k conj(y_k); linear in x, conjugate-linear in y.
Complex inner_product(const ScenarioModel& model, const RandomElement& x,
                      const RandomElement& y);

double l2_norm(const ScenarioModel& model, const RandomElement& x);
double l2_distance(const ScenarioModel& model, const RandomElement& x,
                   const RandomElement& y);

/// E|x|^2 without the square root.
double mean_square(const ScenarioModel& model, const RandomElement& x);

}  // namespace orthomeasure

#endif  // ORTHOMEASURE_PROBABILITY_HPP
