#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "grid.hpp"

namespace sfw {

// One splitmix64 step. Constants from the reference implementation.
inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t mix_seed(uint64_t a, uint64_t b) {
  return splitmix64(a ^ (0xd6e8feb86659fd93ULL * (b + 1)));
}

// Counter-based seed tree: (master, stream, index) -> child seed. Workers can
// seed themselves from their sample index alone, so results never depend on
// scheduling order or thread count.
inline uint64_t derive_seed(uint64_t master, uint64_t stream, uint64_t index = 0) {
  return mix_seed(mix_seed(master, stream), index);
}

// Named streams for derive_seed. Plain constants, not an enum, because they
// get mixed as integers.
namespace seed_stream {
constexpr uint64_t key = 1;
constexpr uint64_t latent = 2;
constexpr uint64_t null_latent = 3;
constexpr uint64_t key_choice = 4;
constexpr uint64_t channel = 5;
constexpr uint64_t attack = 6;
constexpr uint64_t ring = 7;
constexpr uint64_t noise_plane = 8;
constexpr uint64_t payload = 9;
}  // namespace seed_stream

// mt19937_64 for the raw stream, but uniform/gaussian conversion is done by
// hand: std::normal_distribution's algorithm is implementation-defined and
// would break bit-reproducibility across standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t next_u64() { return eng_(); }

  // Uniform on (0,1]; never 0, so log() below is safe.
  double uniform01() { return static_cast<double>((eng_() >> 11) + 1) * 0x1.0p-53; }

  // Uniform integer in [0, n), n >= 1. Modulo bias is ~n/2^64, irrelevant at
  // the pool sizes used here.
  uint64_t uniform_index(uint64_t n) { return eng_() % n; }

  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u = uniform01();
    double v = uniform01();
    double r = std::sqrt(-2.0 * std::log(u));
    double a = 2.0 * std::numbers::pi * v;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  double gaussian(double mean, double stddev) { return mean + stddev * gaussian(); }

  // Circularly-symmetric complex Gaussian with E|z|^2 = total_variance.
  cplx complex_gaussian(double total_variance) {
    double s = std::sqrt(total_variance * 0.5);
    return {gaussian() * s, gaussian() * s};
  }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

inline RealPlane gaussian_plane(int rows, int cols, uint64_t seed, double sigma = 1.0) {
  RealPlane p(rows, cols);
  Rng rng(seed);
  for (double& x : p.data) x = rng.gaussian() * sigma;
  return p;
}

}  // namespace sfw
