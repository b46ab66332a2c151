#pragma once

// Seeded random streams with a frozen algorithm set, so simulated panels are
// reproducible across compilers and standard libraries:
//   engine   std::mt19937_64 (fully specified by the standard)
//   uniform  top 53 bits of one engine output, shifted into (0, 1)
//   normal   Marsaglia polar method
//   gamma    Marsaglia-Tsang squeeze, with the u^(1/a) boost for shape < 1
//   streams  child seeds from SplitMix64 of (seed, stream id)

#include <cmath>
#include <cstdint>
#include <random>

#include "lcm/errors.hpp"

namespace lcm {

inline std::uint64_t splitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(splitMix64(seed)) {}

  std::uint64_t seed() const { return seed_; }

  /// Independent stream derived from this generator's seed; does not advance this one.
  Rng child(std::uint64_t stream) const {
    return Rng(splitMix64(seed_ ^ splitMix64(stream + 0x632be59bd9b4e019ULL)));
  }

  std::uint64_t nextU64() { return engine_(); }

  /// Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

  double normal() {
    if (hasSpare_) {
      hasSpare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    hasSpare_ = true;
    return u * f;
  }

  /// Gamma with the given shape and rate (mean shape / rate).
  double gamma(double shape, double rate) {
    if (!(shape > 0.0) || !(rate > 0.0)) throw DomainError("gamma shape and rate must be positive");
    if (shape < 1.0) {
      const double g = gamma(shape + 1.0, 1.0);
      return g * std::pow(uniform(), 1.0 / shape) / rate;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
    }
  }

  double chiSquared(double df) { return gamma(0.5 * df, 0.5); }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool hasSpare_ = false;
  double spare_ = 0.0;
};

}  // namespace lcm
