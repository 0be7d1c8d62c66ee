#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "aupipe/core.hpp"

namespace aupipe {

struct ConfusionCounts {
  long tp = 0;
  long fp = 0;
  long tn = 0;
  long fn = 0;

  long total() const { return tp + fp + tn + fn; }
};

struct AuMetrics {
  double f1 = 0.0;
  double classification_rate = 0.0;
  ConfusionCounts counts;
};

/// Per-AU metrics plus their unweighted means. The macro values average over
/// exactly the AUs present in per_au.
struct EvaluationReport {
  std::string model;
  std::map<int, AuMetrics> per_au;  // keyed by AU number
  double macro_f1 = 0.0;
  double macro_classification_rate = 0.0;
};

/// Standard confusion counts; throws ShapeError on empty or mismatched inputs.
ConfusionCounts confusion(std::span<const std::uint8_t> preds, std::span<const std::uint8_t> labels);

/// 2*tp / (2*tp + fp + fn). Degenerate conventions: with no true positives,
/// returns 1.0 when fp and fn are also zero (nothing to find, nothing claimed)
/// and 0.0 otherwise.
double f1_score(const ConfusionCounts& counts);

/// (tp + tn) / total; throws InsufficientDataError when total is zero.
double classification_rate(const ConfusionCounts& counts);

EvaluationReport macro_report(const std::string& model, const std::map<int, AuMetrics>& per_au);

/// Derives AuMetrics from counts (f1 + classification rate).
AuMetrics metrics_from_counts(const ConfusionCounts& counts);

std::string report_to_json(const EvaluationReport& report);
EvaluationReport report_from_json(const std::string& text);

/// Aligned-column text table, one row per AU plus the macro line.
std::string report_to_text(const EvaluationReport& report);

/// CSV rows (au,f1,classification_rate,tp,fp,tn,fn) for plotting.
std::string report_to_csv(const EvaluationReport& report);

}  // namespace aupipe
