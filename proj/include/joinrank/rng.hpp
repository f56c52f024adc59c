#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "core.hpp"

namespace joinrank {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// mt19937_64 is fully specified by the standard, so draws are platform independent
// as long as we convert bits to floats ourselves instead of using the distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(splitmix64(seed)) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  std::size_t uniform_index(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }

  Complex unit_complex() {
    const double theta = 2.0 * std::numbers::pi * uniform01();
    return {std::cos(theta), std::sin(theta)};
  }

  CVec unit_complex_vector(Index n) {
    CVec v(n);
    for (Index i = 0; i < n; ++i) v[i] = unit_complex();
    return v;
  }

  Eigen::VectorXd real_vector(Index n, double lo = -1.0, double hi = 1.0) {
    Eigen::VectorXd v(n);
    for (Index i = 0; i < n; ++i) v[i] = uniform(lo, hi);
    return v;
  }

  // Child streams depend only on (seed, index), never on how much of this stream was consumed.
  Rng child(std::uint64_t index) const {
    return Rng(splitmix64(seed_ ^ splitmix64(index + 0x632BE59BD9B4E019ULL)));
  }

  // Fresh stream derived from the current state; advances this stream.
  Rng split() { return Rng(next_u64()); }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace joinrank
