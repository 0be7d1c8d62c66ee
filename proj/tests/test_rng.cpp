#include "doctest.h"

#include <algorithm>
#include <set>

#include "aupipe/rng.hpp"

using namespace aupipe;

TEST_CASE("identical seeds give identical streams") {
  Rng a(123), b(123);
  for (int i = 0; i < 100; ++i) {
    CHECK(a.next_u64() == b.next_u64());
    CHECK(a.uniform01() == b.uniform01());
    CHECK(a.normal() == b.normal());
  }
}

TEST_CASE("below stays in range and covers small bounds") {
  Rng rng(5);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const std::uint64_t v = rng.below(7);
    CHECK(v < 7);
    seen.insert(v);
  }
  CHECK(seen.size() == 7);
}

TEST_CASE("uniform01 lies in [0,1)") {
  Rng rng(9);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("shuffle permutes") {
  Rng rng(11);
  std::vector<int> v(50);
  std::iota(v.begin(), v.end(), 0);
  std::vector<int> shuffled = v;
  rng.shuffle(shuffled);
  CHECK(shuffled != v);  // 1/50! chance of a false alarm
  std::sort(shuffled.begin(), shuffled.end());
  CHECK(shuffled == v);
}

TEST_CASE("sample_indices draws k distinct indices below n") {
  Rng rng(13);
  const auto sample = rng.sample_indices(100, 30);
  CHECK(sample.size() == 30);
  std::set<std::size_t> unique(sample.begin(), sample.end());
  CHECK(unique.size() == 30);
  for (std::size_t v : sample) CHECK(v < 100);

  // k >= n returns everything.
  Rng rng2(13);
  const auto all = rng2.sample_indices(5, 9);
  CHECK(all.size() == 5);
}

TEST_CASE("mix_seed separates streams and items") {
  CHECK(mix_seed(1, 2, 3) != mix_seed(1, 2, 4));
  CHECK(mix_seed(1, 2, 3) != mix_seed(1, 3, 3));
  CHECK(mix_seed(1, 2, 3) != mix_seed(2, 2, 3));
  CHECK(mix_seed(1, 2, 3) == mix_seed(1, 2, 3));
}

TEST_CASE("normal has roughly standard moments") {
  Rng rng(17);
  const int n = 20000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = rng.normal();
    sum += v;
    sum_sq += v * v;
  }
  CHECK(sum / n == doctest::Approx(0.0).epsilon(0.05));
  CHECK(sum_sq / n == doctest::Approx(1.0).epsilon(0.05));
}
