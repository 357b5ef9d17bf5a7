#ifndef ORTHOMEASURE_ERROR_HPP
#define ORTHOMEASURE_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace orthomeasure {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Random elements or coefficient vectors of incompatible length.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Sets, functions or measures that belong to different atom algebras.
class AlgebraMismatchError : public Error {
 public:
  using Error::Error;
};

/// An atom partition or scenario model that violates its invariants.
class ConstructionError : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// The operation needs structure the input does not carry (e.g. interval labels).
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// A countable union whose masses do not appear summable within the term budget.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// An L2 approximation sequence that failed its Cauchy criterion at the maximum level.
class NonConvergenceError : public Error {
 public:
  using Error::Error;
};

/// The dyadic level is too coarse for the requested oscillation.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

/// Malformed scenario configuration. Carries the offending line (1-based, 0 if
/// unknown) and field path.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, std::size_t line, std::string field)
      : Error(what), line_(line), field_(std::move(field)) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

}  // namespace orthomeasure

#endif  // ORTHOMEASURE_ERROR_HPP
