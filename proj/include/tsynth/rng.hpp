#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

namespace tsynth {

// mt19937_64 with hand-rolled draw helpers. The engine's output sequence is
// pinned by the standard; std::*_distribution is not, so every bounded or
// real-valued draw goes through these helpers to keep generated artifacts
// identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next() { return eng_(); }

  // Inclusive range. Modulo draw; bias is irrelevant at these range sizes.
  std::int64_t uniform(std::int64_t lo, std::int64_t hi) {
    std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(next() % span);
  }

  double uniform01() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  bool chance(double p) { return uniform01() < p; }

  // Box-Muller, two fresh uniforms per call.
  double normal() {
    double u1 = uniform01();
    double u2 = uniform01();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  // Index draw with integer weights; weights must sum to > 0.
  size_t weighted(std::span<const int> weights) {
    std::int64_t total = 0;
    for (int w : weights) total += w;
    std::int64_t r = uniform(0, total - 1);
    for (size_t i = 0; i < weights.size(); ++i) {
      r -= weights[i];
      if (r < 0) return i;
    }
    return weights.size() - 1;
  }

  template <typename T>
  const T& pick(std::span<const T> xs) {
    return xs[static_cast<size_t>(uniform(0, static_cast<std::int64_t>(xs.size()) - 1))];
  }

 private:
  std::mt19937_64 eng_;
};

// splitmix64 step; used to derive stream seeds from (global seed, index).
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ull * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace tsynth
