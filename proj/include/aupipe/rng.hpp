#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace aupipe {

/// splitmix64 step; used to derive independent sub-seeds from a base seed so
/// per-AU work items can run in any order without sharing RNG state.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t item = 0) {
  return splitmix64(splitmix64(base ^ (stream * 0xd1342543de82ef95ULL)) + item);
}

/// Deterministic RNG: mt19937_64 with hand-rolled distributions, so identical
/// seeds give identical streams on every platform and standard library.
///
/// Algorithms (fixed; reference samplers in tests mirror them):
///  - below(n): draw 64-bit words, reject those >= 2^64 - (2^64 mod n), reduce mod n.
///  - uniform01(): top 53 bits scaled by 2^-53.
///  - normal(): Marsaglia polar method, second deviate cached.
///  - shuffle: Fisher-Yates, i ascending, swap with i + below(n - i).
///  - sample_indices(n, k): partial Fisher-Yates over 0..n-1, first k kept
///    in selection order.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  std::uint64_t below(std::uint64_t bound) {
    // bound == 0 is a caller bug; keep the check cheap.
    const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % bound;
    std::uint64_t v = gen_();
    while (v >= limit) v = gen_();
    return v % bound;
  }

  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    const std::size_t n = v.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(below(n - i));
      std::swap(v[i], v[j]);
    }
  }

  /// k distinct indices from 0..n-1, in selection order.
  std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k) {
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < k && i < n; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(below(n - i));
      std::swap(pool[i], pool[j]);
    }
    pool.resize(k < n ? k : n);
    return pool;
  }

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace aupipe
