#include "orthomeasure/probability.hpp"

#include <cmath>
#include <string>

#include <fmt/format.h>

#include "orthomeasure/error.hpp"

namespace orthomeasure {

namespace {

void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b)
    throw DimensionError(fmt::format("{}: length mismatch ({} vs {})", what, a, b));
}

}  // namespace

std::string_view to_string(Mode mode) noexcept {
  return mode == Mode::exact ? "exact" : "ensemble";
}

std::optional<Mode> parse_mode(std::string_view text) noexcept {
  if (text == "exact") return Mode::exact;
  if (text == "ensemble") return Mode::ensemble;
  return std::nullopt;
}

ScenarioModel::ScenarioModel(std::shared_ptr<const std::vector<double>> weights, Mode mode,
                             std::uint64_t seed)
    : weights_(std::move(weights)), mode_(mode), seed_(seed) {}

ScenarioModel ScenarioModel::exact(std::vector<double> weights) {
  if (weights.empty()) throw ConstructionError("scenario model needs at least one scenario");
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw ConstructionError(fmt::format("scenario weight {} is not a probability", w));
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw ConstructionError(fmt::format("scenario weights sum to {:.17g}, not 1", sum));
  return ScenarioModel(std::make_shared<const std::vector<double>>(std::move(weights)),
                       Mode::exact, 0);
}

ScenarioModel ScenarioModel::uniform(std::size_t size) {
  if (size == 0) throw ConstructionError("scenario model needs at least one scenario");
  return ScenarioModel(
      std::make_shared<const std::vector<double>>(size, 1.0 / static_cast<double>(size)),
      Mode::exact, 0);
}

ScenarioModel ScenarioModel::ensemble(std::size_t size, std::uint64_t seed) {
  if (size == 0) throw ConstructionError("ensemble needs at least one scenario");
  return ScenarioModel(
      std::make_shared<const std::vector<double>>(size, 1.0 / static_cast<double>(size)),
      Mode::ensemble, seed);
}

bool operator==(const ScenarioModel& a, const ScenarioModel& b) {
  if (a.mode_ != b.mode_ || a.seed_ != b.seed_) return false;
  return a.weights_ == b.weights_ || *a.weights_ == *b.weights_;
}

RandomElement& RandomElement::operator+=(const RandomElement& other) {
  require_same_size(size(), other.size(), "random element sum");
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += other.values_[k];
  return *this;
}

RandomElement& RandomElement::operator-=(const RandomElement& other) {
  require_same_size(size(), other.size(), "random element difference");
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= other.values_[k];
  return *this;
}

RandomElement& RandomElement::operator*=(Complex scale) {
  for (auto& v : values_) v *= scale;
  return *this;
}

RandomElement& RandomElement::add_scaled(Complex scale, const RandomElement& other) {
  require_same_size(size(), other.size(), "random element axpy");
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += scale * other.values_[k];
  return *this;
}

RandomElement RandomElement::conj() const {
  RandomElement out(*this);
  for (auto& v : out.values_) v = std::conj(v);
  return out;
}

Complex expectation(const ScenarioModel& model, const RandomElement& x) {
  require_same_size(model.size(), x.size(), "expectation");
  const auto w = model.weights();
  Complex sum{};
  for (std::size_t k = 0; k < w.size(); ++k) sum += w[k] * x[k];
  return sum;
}

Complex inner_product(const ScenarioModel& model, const RandomElement& x,
                      const RandomElement& y) {
  require_same_size(model.size(), x.size(), "inner product");
  require_same_size(model.size(), y.size(), "inner product");
  const auto w = model.weights();
  // Accumulate real and imaginary parts separately; x conj(y) expanded.
  double re = 0.0;
  double im = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double xr = x[k].real(), xi = x[k].imag();
    const double yr = y[k].real(), yi = y[k].imag();
    re += w[k] * (xr * yr + xi * yi);
    im += w[k] * (xi * yr - xr * yi);
  }
  return {re, im};
}

double mean_square(const ScenarioModel& model, const RandomElement& x) {
  require_same_size(model.size(), x.size(), "mean square");
  const auto w = model.weights();
  double sum = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) sum += w[k] * std::norm(x[k]);
  return sum;
}

double l2_norm(const ScenarioModel& model, const RandomElement& x) {
  return std::sqrt(mean_square(model, x));
}

double l2_distance(const ScenarioModel& model, const RandomElement& x, const RandomElement& y) {
  require_same_size(model.size(), x.size(), "l2 distance");
  require_same_size(model.size(), y.size(), "l2 distance");
  const auto w = model.weights();
  double sum = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) sum += w[k] * std::norm(x[k] - y[k]);
  return std::sqrt(sum);
}

}  // namespace orthomeasure
