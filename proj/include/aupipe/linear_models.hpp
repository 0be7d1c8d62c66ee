#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "aupipe/core.hpp"
#include "aupipe/dataset.hpp"

namespace aupipe {

/// Hyperparameters for both linear families. `cost`, `tolerance` and
/// `max_epochs` drive the SVM solver; `ridge` is the LDA covariance shrinkage.
struct LinearTrainConfig {
  double cost = 1.0;
  double tolerance = 1e-6;
  int max_epochs = 1000;
  double ridge = 1e-6;
};

struct LdaModel {
  std::vector<double> weights;
  double bias = 0.0;
  double ridge = 0.0;
};

struct SvmModel {
  std::vector<double> weights;
  double bias = 0.0;
  double cost = 1.0;
  bool converged = true;
};

/// Solver internals kept for diagnostics and the optimality tests.
struct SvmTrainStats {
  std::vector<double> alpha;
  std::vector<double> dual_objective;  // one entry per epoch, non-increasing
  int epochs = 0;
  double max_violation = 0.0;
};

/// Fisher discriminant on binary labels (0/1): w = (S + lambda I)^-1 (mu+ - mu-)
/// with S the pooled within-class covariance (divide by N) and
/// lambda = ridge * trace(S) / D. The bias puts the boundary at the midpoint of
/// the projected class means. Throws InsufficientDataError when a class is
/// missing, DomainError on non-finite input.
LdaModel train_lda(const Matrix& x, std::span<const std::uint8_t> y, double ridge = 1e-6);

/// L1-loss linear SVM trained in the dual by coordinate descent with a fixed
/// ascending index order per epoch. The bias rides along as a constant
/// augmented feature, so the solved problem is
///   min 0.5 (|w|^2 + b^2) + cost * sum_i max(0, 1 - y_i (w x_i + b)).
/// Stops when the largest projected-gradient violation over an epoch is at
/// most `tolerance`; hitting max_epochs first clears `converged`.
SvmModel train_svm(const Matrix& x, std::span<const std::uint8_t> y,
                   const LinearTrainConfig& config, SvmTrainStats* stats = nullptr);

double decision_value(std::span<const double> weights, double bias, std::span<const double> x);
double decision_value(const LdaModel& model, std::span<const double> x);
double decision_value(const SvmModel& model, std::span<const double> x);

/// Score at or above zero classifies as present.
inline bool predict_from_score(double score) { return score >= 0.0; }

/// Primal objective of the augmented-bias SVM at (w, b); used by the
/// optimality checks.
double svm_primal_objective(const Matrix& x, std::span<const std::uint8_t> y,
                            std::span<const double> weights, double bias, double cost);

// ---- per-AU model files ------------------------------------------------------

/// Trained model plus everything evaluation needs: the standardizer fitted on
/// the balanced training subset and the training configuration.
struct LinearModelFile {
  std::string kind;  // "lda" or "svm"
  int au = 0;
  std::string network;
  std::size_t dimension = 0;
  std::vector<double> weights;
  double bias = 0.0;
  LinearTrainConfig config;
  bool convergence_flag = true;
  StandardizationParams standardizer;
};

void save_linear_model(const std::string& path, const LinearModelFile& file);
LinearModelFile load_linear_model(const std::string& path);

}  // namespace aupipe
