#pragma once

#include <cstdint>
#include <random>

namespace mstnet::nn {

// Seeded streams are kept separate per purpose (init, dropout, shuffle) so
// that changing one consumer does not perturb the others.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [lo, hi). Hand-rolled mapping: std distributions are not
  // guaranteed bit-identical across standard libraries.
  double uniform(double lo, double hi) {
    const double u = double(engine_() >> 11) * 0x1.0p-53;  // [0,1)
    return lo + u * (hi - lo);
  }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Rejection sampling keeps the draw unbiased.
    const std::uint64_t lim = std::numeric_limits<std::uint64_t>::max() / n * n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= lim);
    return x % n;
  }

  bool bernoulli(double p) { return uniform(0.0, 1.0) < p; }

  template <typename It>
  void shuffle(It first, It last) {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i)
      std::swap(first[i - 1], first[below(i)]);
  }

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace mstnet::nn
