#pragma once

#include <cstdint>
#include <random>

namespace treeloc {

/// Portable random stream. The engine is std::mt19937_64, whose output
/// sequence is fixed by the C++ standard; the distributions are implemented
/// here because the std:: ones differ across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Seeds an independent stream for `channel` from a master seed.
  static Rng for_channel(std::uint64_t seed, std::uint64_t channel);

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  /// Standard normal via Box-Muller; consumes two uniforms per pair.
  double normal();

  double normal(double sigma) { return sigma * normal(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// SplitMix64 finalizer, used for seed derivation.
std::uint64_t splitmix64(std::uint64_t x);

}  // namespace treeloc
