#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace seqbh {

// splitmix64 finalizer. Used to spread structured (seed, replication, purpose)
// triples into independent-looking 64-bit states.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// One engine per (seed, replication, purpose) triple. Replications can then run
// on any number of threads, in any order, without changing a single draw.
inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t replication,
                                std::uint64_t purpose = 0) {
  std::uint64_t s = splitmix64(seed);
  s = splitmix64(s ^ (0x517cc1b727220a95ULL * (replication + 1)));
  s = splitmix64(s ^ (0x2545f4914f6cdd1dULL * (purpose + 1)));
  return std::mt19937_64(s);
}

// Marsaglia polar method. Deterministic across platforms given the engine,
// unlike std::normal_distribution whose algorithm is implementation-defined.
class NormalSampler {
 public:
  template <class Engine>
  double operator()(Engine& rng) {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform_(rng) - 1.0;
      v = 2.0 * uniform_(rng) - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    have_spare_ = true;
    return u * m;
  }

  void reset() { have_spare_ = false; }

 private:
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace seqbh
