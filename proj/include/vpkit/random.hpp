#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace vpkit {

/// SplitMix64 finalizer; decorrelates nearby seeds before they reach the
/// Mersenne Twister.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Independent stream for block `block` of a run seeded with `seed`.
inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t block) {
  return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(block + 1)));
}

/// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
inline double uniform01(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

/// Uniform direction on the unit sphere of R^n (n = 2 or 3).
inline Eigen::VectorXd random_direction(int n, std::mt19937_64& rng) {
  constexpr double two_pi = 2 * std::numbers::pi;
  Eigen::VectorXd d(n);
  if (n == 2) {
    const double t = two_pi * uniform01(rng);
    d << std::cos(t), std::sin(t);
  } else {
    const double z = 2 * uniform01(rng) - 1;
    const double t = two_pi * uniform01(rng);
    const double s = std::sqrt(std::max(0.0, 1 - z * z));
    d << s * std::cos(t), s * std::sin(t), z;
  }
  return d;
}

/// Uniform point in the ball B(0, radius) of R^n. The radius factor uses
/// u^{1/n} with u < 1, so the result never leaves the closed ball.
inline Eigen::VectorXd random_in_ball(int n, double radius, std::mt19937_64& rng) {
  const double r = radius * std::pow(uniform01(rng), 1.0 / n);
  return r * random_direction(n, rng);
}

}  // namespace vpkit
