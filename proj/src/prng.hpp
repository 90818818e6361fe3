#ifndef GHLAB_PRNG_HPP
#define GHLAB_PRNG_HPP

#include <cmath>
#include <cstdint>

namespace ghlab {

/// SplitMix64. Every randomized estimate in the tool runs off an explicit
/// seed recorded in the report, never wall-clock entropy.
class Prng {
 public:
  explicit Prng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// uniform in [0, 1)
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// uniform in [-1, 1)
  double next_sym() { return 2.0 * next_double() - 1.0; }

  /// uniform integer in [0, n)
  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

  /// standard normal via Box-Muller
  double next_gauss() {
    double u1 = next_double(), u2 = next_double();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

 private:
  std::uint64_t state_;
};

}  // namespace ghlab

#endif
