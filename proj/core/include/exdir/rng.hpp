#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace exdir {

// Deterministic generator (splitmix64 core) used everywhere randomness is
// needed. std:: distributions are implementation-defined, which would break
// golden files, so the few draws we need are spelled out.
class Rng {
public:
  explicit Rng(uint64_t seed) : state_(seed ^ 0x9e3779b97f4a7c15ULL) {}

  uint64_t next() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, bound), bound > 0. Modulo bias is irrelevant at our scale.
  uint64_t below(uint64_t bound) { return next() % bound; }

  int64_t range(int64_t lo, int64_t hi) {  // inclusive
    return lo + static_cast<int64_t>(below(static_cast<uint64_t>(hi - lo + 1)));
  }

  double uniform01() { return (next() >> 11) * 0x1.0p-53; }

  // Box-Muller; one value per call, the twin is discarded for simplicity.
  double gaussian() {
    double u1 = uniform01();
    double u2 = uniform01();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = below(i);
      std::swap(v[i - 1], v[j]);
    }
  }

  // Derives an independent stream, e.g. per recursion branch.
  static uint64_t derive(uint64_t seed, uint64_t salt) {
    Rng r(seed ^ (salt * 0xff51afd7ed558ccdULL + 0x2545f4914f6cdd1dULL));
    return r.next();
  }

private:
  uint64_t state_;
};

}  // namespace exdir
