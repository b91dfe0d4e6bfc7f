#pragma once

// Seeded, platform-independent random streams. Stream seeds are derived from a
// master seed with splitmix64 mixing so that every (purpose, index) pair gets an
// independent substream. Gaussian variates use Box-Muller on top of 53-bit
// uniforms instead of std::normal_distribution, whose output is
// implementation-defined.

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <string_view>

namespace raf::rng {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// splitmix64 finalizer (Steele, Lea, Flood 2014).
inline std::uint64_t mix(std::uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Substream seed for (master, tag, a, b), e.g. (seed, "trial", sweep_index, trial).
inline std::uint64_t derive_stream(std::uint64_t master, std::string_view tag,
                                   std::uint64_t a = 0, std::uint64_t b = 0) {
  std::uint64_t h = mix(master ^ fnv1a(tag));
  h = mix(h ^ a);
  h = mix(h ^ b);
  return h;
}

class Stream {
 public:
  explicit Stream(std::uint64_t seed) : gen_(mix(seed)) {}

  // Uniform in [0,1) with 53 random bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  std::uint64_t bits() { return gen_(); }

  // Uniform integer in [0, bound).
  std::uint64_t uniform_index(std::uint64_t bound) {
    const std::uint64_t limit = bound * (UINT64_MAX / bound);
    std::uint64_t v;
    do {
      v = gen_();
    } while (v >= limit);
    return v % bound;
  }

  // Standard normal via Box-Muller; one spare cached per pair.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  // CN(0,1): real and imaginary parts independent N(0, 1/2).
  std::complex<double> cnormal() {
    const double s = 1.0 / std::sqrt(2.0);
    const double re = normal();
    const double im = normal();
    return {s * re, s * im};
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace raf::rng
