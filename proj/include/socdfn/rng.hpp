#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace socdfn {

/// The single pseudo-random source behind every stochastic choice (splits,
/// shuffles, init, dropout, drive cycles).
///
/// Built on std::mt19937_64, whose output sequence is fixed by the standard.
/// The std distributions are implementation-defined, so uniform, normal and
/// index draws are derived here by hand to keep streams identical across
/// standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; the second variate is cached.
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Unbiased integer in [0, n); n must be positive.
  std::uint64_t index(std::uint64_t n);

  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(index(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Mixes a base seed with stream coordinates (fold id, epoch, batch) into an
/// independent child seed. SplitMix64 finalizer.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

}  // namespace socdfn
