#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace photon_discrim {

/// One splitmix64 step. Used for seed derivation, not for sampling.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Mixes a base seed with up to three stream identifiers into an independent
/// child seed. Collections, sweep cells and repetitions all derive their
/// seeds this way, so results do not depend on execution order.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t s = base;
  std::uint64_t h = splitmix64(s);
  s ^= a + 0x9e3779b97f4a7c15ULL;
  h ^= splitmix64(s);
  s ^= b + 0xc2b2ae3d27d4eb4fULL;
  h ^= splitmix64(s);
  s ^= c + 0x165667b19e3779f9ULL;
  h ^= splitmix64(s);
  return h;
}

/// Deterministic random stream. The engine (mt19937_64) and every derived
/// draw are pinned by the C++ standard or implemented here, so identical
/// seeds give bit-identical streams on any conforming platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; consumes two uniforms per pair,
  /// caching the second draw.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  double gaussian(double sigma) { return sigma * gaussian(); }

  /// Poisson draw by Knuth's product method. Adequate for the low means
  /// used here (cost grows linearly with the mean).
  int poisson(double mean) {
    const double limit = std::exp(-mean);
    int k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform();
    } while (p > limit);
    return k - 1;
  }

  /// Geometric draw on {0, 1, 2, ...} with success probability p:
  /// P(n) = p (1-p)^n, sampled by exact CDF inversion.
  int geometric(double p) {
    if (p >= 1.0) return 0;
    double u = uniform();
    return static_cast<int>(std::log1p(-u) / std::log1p(-p));
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace photon_discrim
