#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace smart {

/// Seeded generator with self-contained sampling routines, so that all
/// simulated streams are reproducible bit-for-bit across platforms.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  double uniform() {
    // 53-bit mantissa uniform in [0, 1)
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double normal() {
    // Box-Muller; fresh pair per call keeps streams insensitive to call parity
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  /// Uniform integer in [0, bound) by rejection.
  uint64_t below(uint64_t bound) {
    const uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    uint64_t x;
    do {
      x = gen_();
    } while (x >= limit);
    return x % bound;
  }

  void shuffle(std::vector<int>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

  /// k indices drawn from [0, m) without replacement, in draw order.
  std::vector<int> sample_without_replacement(int m, int k) {
    std::vector<int> pool(m);
    for (int i = 0; i < m; ++i) pool[i] = i;
    std::vector<int> out;
    out.reserve(k);
    for (int i = 0; i < k; ++i) {
      const size_t j = below(pool.size());
      out.push_back(pool[j]);
      pool.erase(pool.begin() + j);
    }
    return out;
  }

 private:
  std::mt19937_64 gen_;
};

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Child stream seed derived from a master seed and two indices.
inline uint64_t child_seed(uint64_t master, uint64_t a, uint64_t b) {
  return splitmix64(splitmix64(master ^ splitmix64(a + 1)) ^ splitmix64(b + 0x517cc1b727220a95ULL));
}

}  // namespace smart
