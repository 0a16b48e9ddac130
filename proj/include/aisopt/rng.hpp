#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace aisopt {

// Deterministic random stream. Hand-rolled transforms (fixed draw counts per
// call) so trajectories are reproducible bit-for-bit across engines that
// share a stream prefix: uniform consumes one mt19937_64 word, normal
// consumes exactly two.
class RngStream {
public:
  explicit RngStream(std::uint64_t seed) : gen_(seed) {}

  double uniform() {  // (0, 1)
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() {  // Box-Muller, second variate discarded
    double u1 = uniform(), u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  // Exponential(1).
  double exponential() { return -std::log(uniform()); }

  std::uint64_t raw() { return gen_(); }

private:
  std::mt19937_64 gen_;
};

// Decorrelates the auxiliary stream from the gradient stream of a trajectory.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace aisopt
