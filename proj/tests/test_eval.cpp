#include "doctest.h"

#include "aupipe/eval.hpp"
#include "aupipe/rng.hpp"
#include "oracles.hpp"

using namespace aupipe;

TEST_CASE("confusion counts") {
  const std::vector<std::uint8_t> p1 = {1, 0, 1};
  const auto c1 = confusion(p1, p1);
  CHECK(c1.tp == 2);
  CHECK(c1.tn == 1);
  CHECK(c1.fp == 0);
  CHECK(c1.fn == 0);

  const std::vector<std::uint8_t> ones = {1, 1, 1, 1};
  const std::vector<std::uint8_t> zeros = {0, 0, 0, 0};
  CHECK(confusion(ones, zeros).fp == 4);

  const std::vector<std::uint8_t> preds = {1, 1, 0, 0};
  const std::vector<std::uint8_t> labels = {1, 0, 1, 0};
  const auto c3 = confusion(preds, labels);
  CHECK(c3.tp == 1);
  CHECK(c3.fp == 1);
  CHECK(c3.fn == 1);
  CHECK(c3.tn == 1);

  CHECK_THROWS_AS(confusion(std::vector<std::uint8_t>{}, std::vector<std::uint8_t>{}),
                  ShapeError);
  CHECK_THROWS_AS(confusion(preds, ones), ShapeError);  // 4 vs 4 is fine, use mismatched
  CHECK_THROWS_AS(confusion(p1, preds), ShapeError);
}

TEST_CASE("f1 values and degenerate conventions") {
  CHECK(f1_score({2, 0, 0, 0}) == 1.0);
  CHECK(f1_score({1, 1, 0, 1}) == 0.5);  // 2/(2+1+1)
  CHECK(f1_score({0, 0, 10, 0}) == 1.0);  // nothing to find, nothing claimed
  CHECK(f1_score({0, 3, 1, 0}) == 0.0);
  CHECK(f1_score({0, 0, 0, 2}) == 0.0);
}

TEST_CASE("classification rate") {
  CHECK(classification_rate({3, 0, 2, 0}) == 1.0);
  CHECK(classification_rate({1, 1, 1, 1}) == 0.5);
  CHECK(classification_rate({0, 2, 0, 1}) == 0.0);
  CHECK_THROWS_AS(classification_rate({0, 0, 0, 0}), InsufficientDataError);
}

TEST_CASE("f1 ignores tn") {
  const ConfusionCounts a{5, 3, 2, 4};
  ConfusionCounts b = a;
  b.tn = 1000;
  CHECK(f1_score(a) == f1_score(b));
}

TEST_CASE("macro report averages per-AU metrics") {
  std::map<int, AuMetrics> per_au;
  per_au[1] = AuMetrics{0.4, 0.6, {1, 1, 1, 1}};
  per_au[2] = AuMetrics{0.6, 0.8, {1, 1, 1, 1}};
  const auto report = macro_report("m", per_au);
  CHECK(report.macro_f1 == doctest::Approx(0.5));
  CHECK(report.macro_classification_rate == doctest::Approx(0.7));

  std::map<int, AuMetrics> single;
  single[25] = AuMetrics{0.33, 0.44, {1, 0, 0, 0}};
  const auto one = macro_report("m", single);
  CHECK(one.macro_f1 == 0.33);

  // 12 equal AUs average to the same value.
  std::map<int, AuMetrics> twelve;
  for (int au : kAuNumbers) twelve[au] = AuMetrics{0.607, 0.8, {1, 1, 1, 1}};
  CHECK(macro_report("m", twelve).macro_f1 == doctest::Approx(0.607));

  CHECK_THROWS_AS(macro_report("m", {}), InsufficientDataError);
}

TEST_CASE("metrics match the naive counting oracle on random fixtures") {
  Rng rng(2024);
  for (int fixture = 0; fixture < 20; ++fixture) {
    const std::size_t n = 1 + rng.below(200);
    std::vector<std::uint8_t> preds(n), labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      preds[i] = rng.below(2) ? 1 : 0;
      labels[i] = rng.below(2) ? 1 : 0;
    }
    const auto counts = confusion(preds, labels);
    const auto naive = oracles::naive_confusion(preds, labels);
    CHECK(counts.tp == naive.tp);
    CHECK(counts.fp == naive.fp);
    CHECK(counts.tn == naive.tn);
    CHECK(counts.fn == naive.fn);
    CHECK(f1_score(counts) == oracles::naive_f1(naive));
    CHECK(classification_rate(counts) == oracles::naive_rate(naive));
  }
}

TEST_CASE("report json round trip") {
  std::map<int, AuMetrics> per_au;
  per_au[1] = AuMetrics{0.123456789012345, 0.5, {10, 2, 30, 4}};
  per_au[26] = AuMetrics{1.0, 1.0, {5, 0, 5, 0}};
  const auto report = macro_report("svm_synth", per_au);
  const auto parsed = report_from_json(report_to_json(report));
  CHECK(parsed.model == report.model);
  CHECK(parsed.macro_f1 == report.macro_f1);
  CHECK(parsed.per_au.at(1).f1 == report.per_au.at(1).f1);
  CHECK(parsed.per_au.at(26).counts.tp == 5);
}
