#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "aupipe/core.hpp"

namespace aupipe {

/// Per-frame outputs of one ensemble member over the evaluation frames.
/// Scores share one convention across families: at or above zero means
/// present (decision values for linear models, p(present) - 0.5 for LSTM).
struct MemberPrediction {
  std::string name;  // family tag, e.g. "svm/resnet"
  std::vector<std::uint8_t> votes;
  std::vector<double> scores;
};

struct VoteRecord {
  std::size_t frame = 0;
  std::vector<std::uint8_t> member_votes;
  std::vector<double> member_scores;
  std::uint8_t decision = 0;
};

struct EnsemblePrediction {
  std::vector<std::uint8_t> decisions;
  std::vector<VoteRecord> records;
};

/// Majority vote over one frame. Present wins on a strict majority; an exact
/// tie falls back to the sign of the mean member score, with mean zero
/// resolving to present. Throws ShapeError on empty or mismatched lists.
bool majority_vote(std::span<const std::uint8_t> votes, std::span<const double> scores);

/// Frame-wise majority vote across members (at least two, equal frame
/// counts). Vote records are kept for the audit output.
EnsemblePrediction ensemble_predict(std::span<const MemberPrediction> members);

}  // namespace aupipe
