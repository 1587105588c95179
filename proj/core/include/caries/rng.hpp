#pragma once

#include <cstdint>
#include <random>

namespace caries {

/// Seeded random stream with distribution code owned here, so sequences are
/// identical across standard library implementations (std:: distributions
/// are implementation-defined; the engines are not).
class Rng {
public:
  explicit Rng(std::uint64_t seed);
  /// Independent stream for (seed, stream_index), e.g. one per sample.
  Rng(std::uint64_t seed, std::uint64_t stream_index);

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in the inclusive range [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  double normal(double mean, double sigma);

  template <typename It>
  void shuffle(It first, It last) {
    const auto n = last - first;
    for (auto i = n - 1; i > 0; --i) {
      const auto j = uniform_int(0, static_cast<std::int64_t>(i));
      std::iter_swap(first + i, first + j);
    }
  }

private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace caries
