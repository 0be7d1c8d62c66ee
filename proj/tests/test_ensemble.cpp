#include "doctest.h"

#include <algorithm>

#include "aupipe/ensemble.hpp"
#include "aupipe/rng.hpp"

using namespace aupipe;

namespace {

MemberPrediction member(const std::string& name, std::vector<std::uint8_t> votes) {
  MemberPrediction m;
  m.name = name;
  m.scores.resize(votes.size());
  for (std::size_t i = 0; i < votes.size(); ++i) m.scores[i] = votes[i] ? 0.25 : -0.25;
  m.votes = std::move(votes);
  return m;
}

}  // namespace

TEST_CASE("majority vote basics") {
  const std::vector<std::uint8_t> v1 = {1, 0, 1};
  const std::vector<double> s1 = {0.5, -0.5, 0.5};
  CHECK(majority_vote(v1, s1));

  const std::vector<std::uint8_t> v0 = {0, 0, 0};
  const std::vector<double> s0 = {-1, -1, -1};
  CHECK_FALSE(majority_vote(v0, s0));

  // Tie broken by the mean score: 0.06 > 0.
  const std::vector<std::uint8_t> tie = {1, 1, 0, 0};
  const std::vector<double> tie_scores = {0.2, 0.1, -0.05, -0.01};
  CHECK(majority_vote(tie, tie_scores));

  // Tie with negative mean resolves absent; exact zero resolves present.
  const std::vector<double> neg_scores = {0.1, 0.1, -0.5, -0.5};
  CHECK_FALSE(majority_vote(tie, neg_scores));
  const std::vector<double> zero_scores = {0.5, 0.5, -0.5, -0.5};
  CHECK(majority_vote(tie, zero_scores));

  CHECK_THROWS_AS(majority_vote({}, {}), ShapeError);
  CHECK_THROWS_AS(majority_vote(v1, tie_scores), ShapeError);
}

TEST_CASE("odd member counts never reach the tie-break") {
  // Scores are adversarial: they would flip the decision if consulted.
  const std::vector<std::uint8_t> votes = {1, 1, 0};
  const std::vector<double> scores = {0.01, 0.01, -100.0};
  CHECK(majority_vote(votes, scores));
  const std::vector<std::uint8_t> votes2 = {0, 0, 1};
  const std::vector<double> scores2 = {-0.01, -0.01, 100.0};
  CHECK_FALSE(majority_vote(votes2, scores2));
}

TEST_CASE("unanimous members propagate through ensemble_predict") {
  const std::vector<MemberPrediction> members = {member("a", {1, 0, 1, 0}),
                                                 member("b", {1, 0, 1, 0}),
                                                 member("c", {1, 0, 1, 0})};
  const auto result = ensemble_predict(members);
  CHECK(result.decisions == std::vector<std::uint8_t>{1, 0, 1, 0});
  CHECK(result.records.size() == 4);
  CHECK(result.records[0].member_votes.size() == 3);
}

TEST_CASE("ensemble fixes disjoint single-member errors") {
  // Ground truth over 6 frames; each member errs on its own disjoint frames.
  const std::vector<std::uint8_t> truth = {1, 1, 0, 0, 1, 0};
  std::vector<std::uint8_t> a = truth, b = truth, c = truth;
  a[0] ^= 1;
  b[2] ^= 1;
  c[4] ^= 1;
  const std::vector<MemberPrediction> members = {member("a", a), member("b", b), member("c", c)};
  CHECK(ensemble_predict(members).decisions == truth);
}

TEST_CASE("ensemble decision is invariant under member reordering") {
  Rng rng(31);
  std::vector<MemberPrediction> members;
  for (int m = 0; m < 5; ++m) {
    std::vector<std::uint8_t> votes(40);
    MemberPrediction pred;
    pred.name = "m" + std::to_string(m);
    for (auto& v : votes) v = rng.below(2) ? 1 : 0;
    pred.votes = votes;
    pred.scores.resize(votes.size());
    for (std::size_t i = 0; i < votes.size(); ++i) {
      pred.scores[i] = (votes[i] ? 1.0 : -1.0) * (0.1 + rng.uniform01());
    }
    members.push_back(std::move(pred));
  }
  const auto base = ensemble_predict(members).decisions;
  for (int trial = 0; trial < 10; ++trial) {
    rng.shuffle(members);
    CHECK(ensemble_predict(members).decisions == base);
  }
}

TEST_CASE("duplicating an always-present member cannot reduce present decisions") {
  Rng rng(32);
  std::vector<MemberPrediction> members;
  for (int m = 0; m < 3; ++m) {
    std::vector<std::uint8_t> votes(64);
    for (auto& v : votes) v = rng.below(2) ? 1 : 0;
    members.push_back(member("m" + std::to_string(m), std::move(votes)));
  }
  members.push_back(member("always", std::vector<std::uint8_t>(64, 1)));
  const auto before = ensemble_predict(members).decisions;
  members.push_back(member("always2", std::vector<std::uint8_t>(64, 1)));
  const auto after = ensemble_predict(members).decisions;
  const auto count = [](const std::vector<std::uint8_t>& v) {
    return std::count(v.begin(), v.end(), std::uint8_t{1});
  };
  CHECK(count(after) >= count(before));
}

TEST_CASE("ensemble_predict validates members") {
  CHECK_THROWS_AS(ensemble_predict(std::vector<MemberPrediction>{member("a", {1})}), ShapeError);
  const std::vector<MemberPrediction> mismatched = {member("a", {1, 0}), member("b", {1})};
  CHECK_THROWS_AS(ensemble_predict(mismatched), ShapeError);
}
