#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <string_view>

namespace shiftlab {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

// One root seed is split into named substreams so that every component of an
// experiment (paths, noise, test points, replications) draws from its own
// independent stream and can be regenerated in isolation.
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view label,
                                 std::uint64_t index = 0) {
  std::uint64_t s = root ^ fnv1a64(label);
  s ^= 0x9e3779b97f4a7c15ull * (index + 1);
  std::uint64_t z = s;
  splitmix64(z);
  return splitmix64(z);
}

// Deterministic RNG stream. All transformations (uniform, normal, categorical)
// are implemented here so that output depends only on the mt19937_64 engine,
// never on the standard library's distribution internals.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}
  RngStream(std::uint64_t root, std::string_view label, std::uint64_t index = 0)
      : engine_(derive_seed(root, label, index)) {}

  std::uint64_t bits() { return engine_(); }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1]; safe under log().
  double uniform_pos() { return 1.0 - uniform(); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller without caching the second variate.
  double normal() {
    const double u1 = uniform_pos();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  std::uint64_t uniform_index(std::uint64_t n) {
    // rejection-free modulo is fine at our scales; bias < 2^-40 for n < 2^24
    return engine_() % n;
  }

  // Draw from the categorical law described by cumulative weights
  // (cum.back() == 1 within rounding). Linear scan: used with small supports.
  std::size_t categorical_cum(std::span<const double> cum) {
    const double u = uniform();
    const std::size_t n = cum.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (u < cum[i]) return i;
    }
    return n - 1;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace shiftlab
