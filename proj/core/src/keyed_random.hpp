#ifndef ORTHOMEASURE_SRC_KEYED_RANDOM_HPP
#define ORTHOMEASURE_SRC_KEYED_RANDOM_HPP

#include <bit>
#include <complex>
#include <cstdint>
#include <limits>
#include <random>

namespace orthomeasure::detail {

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t combine(std::uint64_t a, std::uint64_t b) noexcept {
  return mix64(a ^ std::rotl(mix64(b), 23));
}

/// SplitMix64 as a UniformRandomBitGenerator, seeded from a key.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;
  explicit SplitMix64(std::uint64_t state) noexcept : state_(state) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// (xi + i eta) / sqrt(2) with xi, eta independent standard normals: E|W|^2 = 1.
inline std::complex<double> unit_complex_normal(std::uint64_t key) {
  SplitMix64 engine(key);
  std::normal_distribution<double> normal;
  const double xi = normal(engine);
  const double eta = normal(engine);
  constexpr double kInvSqrt2 = 0.70710678118654752440;
  return {xi * kInvSqrt2, eta * kInvSqrt2};
}

inline std::uint64_t double_bits(double x) noexcept { return std::bit_cast<std::uint64_t>(x); }

}  // namespace orthomeasure::detail

#endif  // ORTHOMEASURE_SRC_KEYED_RANDOM_HPP
