#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aupipe/core.hpp"
#include "aupipe/dataset.hpp"
#include "aupipe/eval.hpp"
#include "aupipe/linear_models.hpp"
#include "aupipe/lstm.hpp"

namespace aupipe {

// CLI exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitPartialFailure = 2;
inline constexpr int kExitTotalFailure = 3;

struct SequenceSettings {
  int pad = 3;
  int inactive_min = 500;
  int inactive_max = 1000;
};

struct ClassifierSpec {
  std::string kind;  // "lda", "svm" or "lstm"
  std::string network;
  LinearTrainConfig linear;
  lstm::Config recurrent;  // input_dim filled in from the data at train time
};

/// One experiment: where the data lives, which AUs and classifiers to run,
/// and the seeds that make reruns bit-identical.
struct ExperimentConfig {
  std::map<std::string, std::string> features;  // network tag -> directory
  std::string labels_path;
  std::string landmarks_path;
  std::string split_path;
  std::vector<int> au_numbers;  // defaults to all 12
  int threshold = kDefaultThreshold;
  std::uint64_t seed = 0;
  std::string out_dir;
  SequenceSettings sequences;
  double region_margin = 0.1;
  std::vector<ClassifierSpec> classifiers;
};

ExperimentConfig load_experiment_config(const std::string& path);

/// Parses the JSON text form (used for flag overrides on top of a file).
ExperimentConfig parse_experiment_config(const std::string& json_text,
                                         const std::string& origin);

/// Checks everything that can be checked before any side effect: referenced
/// input files exist, AU numbers are valid, classifier kinds known. Throws
/// ValidationError.
void validate_experiment_config(const ExperimentConfig& config, bool need_landmarks = false);

/// Feature file path convention: <dir>/<subject>__<network>.aufe.
std::string feature_file_path(const std::string& dir, const std::string& subject,
                              const std::string& network);

/// Loads labels (+ optional landmarks) and the split spec.
struct LoadedExperiment {
  Dataset dataset;
  SplitSpec split_spec;
  Split split;
  std::vector<AuId> au_list;
};
LoadedExperiment load_experiment_data(const ExperimentConfig& config, bool with_landmarks);

/// Loads every subject's feature file for `network` and attaches it.
void attach_network_features(Dataset& dataset, const ExperimentConfig& config,
                             const std::string& network);

struct AuOutcome {
  std::string kind;
  std::string network;
  int au = 0;
  bool ok = false;
  bool converged = true;
  double seconds = 0.0;
  std::string model_path;
  std::string error;
};

struct TrainSummary {
  std::vector<AuOutcome> outcomes;
  std::string log_path;
  int exit_code = kExitOk;
};

/// Full training pipeline: load -> binarize -> split -> balance -> standardize
/// -> per-AU models, one model file per (classifier, AU). Per-AU failures are
/// collected, not fatal.
TrainSummary run_train(const ExperimentConfig& config);

/// Ensemble description: family-tagged member model paths per AU.
struct EnsembleMemberSpec {
  std::string family;
  std::map<int, std::string> model_paths;  // AU number -> file
};
struct EnsembleSpecFile {
  std::string name;
  std::vector<EnsembleMemberSpec> members;
};
EnsembleSpecFile load_ensemble_spec(const std::string& path);

struct EvalRequest {
  std::vector<std::string> model_paths;
  std::optional<std::string> ensemble_spec_path;
};

struct EvalSummary {
  std::vector<EvaluationReport> reports;
  std::vector<std::string> report_paths;
  std::vector<std::string> errors;
  int exit_code = kExitOk;
};

/// Evaluates model sets (grouped by kind/network) and, when requested, the
/// ensemble, on the test split. Features are standardized with the params
/// stored in each model file.
EvalSummary run_eval(const ExperimentConfig& config, const EvalRequest& request);

struct RegionsSummary {
  std::size_t rows_written = 0;
  std::vector<std::string> missing;
  std::string manifest_path;
  int exit_code = kExitOk;
};

RegionsSummary run_regions(const ExperimentConfig& config, const std::string& manifest_path);

/// Comparison table over several report JSON files.
std::string render_report_comparison(const std::vector<EvaluationReport>& reports, bool per_au);
std::string comparison_csv(const std::vector<EvaluationReport>& reports);

/// Deterministic provenance sidecar (config hash, seed, format versions); no
/// timestamps, so reruns compare byte-identical.
void write_provenance(const std::string& out_dir, const std::string& command,
                      const ExperimentConfig& config);

std::uint64_t fnv1a64(const std::string& text);

}  // namespace aupipe
