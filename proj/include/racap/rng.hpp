#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace racap {

// Deterministic random source. Everything that must reproduce bit-for-bit
// under a fixed seed goes through this class; std:: distributions and
// std::shuffle are implementation-defined, so the few draws we need are
// spelled out by hand on top of mt19937_64.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // uniform in [0, 1), 53 random mantissa bits
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  // uniform in [0, n), rejection sampled so every value is equally likely
  int uniform_int(int n) {
    const auto un = static_cast<std::uint64_t>(n);
    const std::uint64_t limit =
        std::numeric_limits<std::uint64_t>::max() -
        std::numeric_limits<std::uint64_t>::max() % un;
    std::uint64_t x = eng_();
    while (x >= limit) x = eng_();
    return static_cast<int>(x % un);
  }

  // Fisher-Yates
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_int(static_cast<int>(i)));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace racap
