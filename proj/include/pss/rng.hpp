#pragma once

// Counter-based random numbers: every draw is a pure function of
// (seed, path, stream, counter), so paths can be generated in any order or
// on any thread and still come out bit-identical.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace pss {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) { return splitmix64(a ^ splitmix64(b)); }

class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t path, std::uint64_t stream = 0)
      : key_(hash_combine(hash_combine(seed, path), stream)) {}

  std::uint64_t bits(std::uint64_t counter) const { return splitmix64(key_ + counter * 0x9e3779b97f4a7c15ULL); }

  // Uniform on the open interval (0, 1).
  double uniform(std::uint64_t counter) const {
    return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
  }

  // Box-Muller pair built from uniforms 2k and 2k+1.
  std::pair<double, double> normal_pair(std::uint64_t k) const {
    const double r = std::sqrt(-2.0 * std::log(uniform(2 * k)));
    const double theta = 2.0 * std::numbers::pi * uniform(2 * k + 1);
    return {r * std::cos(theta), r * std::sin(theta)};
  }

  double normal(std::uint64_t k) const {
    const auto [a, b] = normal_pair(k / 2);
    return k % 2 == 0 ? a : b;
  }

 private:
  std::uint64_t key_;
};

}  // namespace pss
