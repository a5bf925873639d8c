#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <span>

namespace satkgc {

// Deterministic RNG used everywhere randomness is needed. The raw mt19937_64
// stream is fully specified by the standard; the derived draws below avoid
// std::*_distribution, whose output is implementation-defined, so results are
// reproducible across compilers and platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n), unbiased via rejection.
  std::int64_t uniform_int(std::int64_t n) {
    const std::uint64_t un = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % un;
    std::uint64_t x;
    do {
      x = next();
    } while (x >= limit);
    return static_cast<std::int64_t>(x % un);
  }

  bool bernoulli(double p) { return uniform01() < p; }

  // Index into an unnormalized cumulative weight array.
  std::size_t sample_cdf(std::span<const double> cdf) {
    const double r = uniform01() * cdf.back();
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), r);
    return static_cast<std::size_t>(
        std::min<std::ptrdiff_t>(it - cdf.begin(),
                                 static_cast<std::ptrdiff_t>(cdf.size()) - 1));
  }

  template <typename It>
  void shuffle(It first, It last) {
    const auto n = last - first;
    for (std::ptrdiff_t i = n - 1; i > 0; --i) {
      std::swap(first[i], first[uniform_int(i + 1)]);
    }
  }

  static std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  // Stable combination of a global seed and a task id, so per-task streams
  // are identical whether tasks run serially or in parallel.
  static std::uint64_t mix(std::uint64_t seed, std::uint64_t task) {
    return splitmix(seed ^ splitmix(task));
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace satkgc
