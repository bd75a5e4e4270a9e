#pragma once

// Deterministic, splittable random streams. Every sweep cell / shot derives
// its own stream from (master seed, index), so results do not depend on
// thread scheduling or worker count. Gaussians use Box-Muller on explicit
// uniforms rather than std::normal_distribution (whose draw sequence is
// implementation-defined).

#include <cstdint>
#include <cmath>

namespace jrm {

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(mix64(seed ^ 0x853c49e6748fea9bULL)) {}

  // Independent child stream; deterministic in (parent seed, id) only.
  static Rng stream(std::uint64_t seed, std::uint64_t id) {
    return Rng(mix64(seed) ^ mix64(id * 0xda942042e4dd58b5ULL + 1));
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // standard normal; consumes exactly two uniforms
  double gaussian() {
    double u1 = uniform(), u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();  // astronomically rare
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  double gaussian(double mean, double sd) { return mean + sd * gaussian(); }

 private:
  std::uint64_t state_;
};

}  // namespace jrm
