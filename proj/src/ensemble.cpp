#include "aupipe/ensemble.hpp"

namespace aupipe {

bool majority_vote(std::span<const std::uint8_t> votes, std::span<const double> scores) {
  if (votes.empty()) throw ShapeError("majority_vote: no votes");
  if (votes.size() != scores.size()) {
    throw ShapeError("majority_vote: " + std::to_string(votes.size()) + " votes vs " +
                     std::to_string(scores.size()) + " scores");
  }
  std::size_t present = 0;
  for (std::uint8_t v : votes) present += v ? 1 : 0;
  const std::size_t absent = votes.size() - present;
  if (present != absent) return present > absent;
  double mean = 0.0;
  for (double s : scores) mean += s;
  mean /= static_cast<double>(scores.size());
  return mean >= 0.0;
}

EnsemblePrediction ensemble_predict(std::span<const MemberPrediction> members) {
  if (members.size() < 2) throw ShapeError("ensemble_predict: need at least 2 members");
  const std::size_t frames = members[0].votes.size();
  for (const MemberPrediction& m : members) {
    if (m.votes.size() != frames || m.scores.size() != frames) {
      throw ShapeError("ensemble_predict: member '" + m.name +
                       "' predicts a different frame count");
    }
  }
  if (frames == 0) throw ShapeError("ensemble_predict: no frames");

  EnsemblePrediction out;
  out.decisions.resize(frames);
  out.records.resize(frames);
  for (std::size_t t = 0; t < frames; ++t) {
    VoteRecord& rec = out.records[t];
    rec.frame = t;
    rec.member_votes.reserve(members.size());
    rec.member_scores.reserve(members.size());
    for (const MemberPrediction& m : members) {
      rec.member_votes.push_back(m.votes[t]);
      rec.member_scores.push_back(m.scores[t]);
    }
    rec.decision = majority_vote(rec.member_votes, rec.member_scores) ? 1 : 0;
    out.decisions[t] = rec.decision;
  }
  return out;
}

}  // namespace aupipe
