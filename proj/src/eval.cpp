#include "aupipe/eval.hpp"

#include <cstdio>

#include "json.hpp"

namespace aupipe {

ConfusionCounts confusion(std::span<const std::uint8_t> preds,
                          std::span<const std::uint8_t> labels) {
  if (preds.empty()) throw ShapeError("confusion: empty prediction list");
  if (preds.size() != labels.size()) {
    throw ShapeError("confusion: " + std::to_string(preds.size()) + " predictions vs " +
                     std::to_string(labels.size()) + " labels");
  }
  ConfusionCounts c;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const bool p = preds[i] != 0;
    const bool l = labels[i] != 0;
    if (p && l)
      ++c.tp;
    else if (p && !l)
      ++c.fp;
    else if (!p && l)
      ++c.fn;
    else
      ++c.tn;
  }
  return c;
}

double f1_score(const ConfusionCounts& c) {
  if (c.tp == 0) return (c.fp == 0 && c.fn == 0) ? 1.0 : 0.0;
  return 2.0 * static_cast<double>(c.tp) / static_cast<double>(2 * c.tp + c.fp + c.fn);
}

double classification_rate(const ConfusionCounts& c) {
  const long total = c.total();
  if (total == 0) throw InsufficientDataError("classification_rate: no evaluated frames");
  return static_cast<double>(c.tp + c.tn) / static_cast<double>(total);
}

AuMetrics metrics_from_counts(const ConfusionCounts& counts) {
  return AuMetrics{f1_score(counts), classification_rate(counts), counts};
}

EvaluationReport macro_report(const std::string& model, const std::map<int, AuMetrics>& per_au) {
  if (per_au.empty()) throw InsufficientDataError("macro_report: no per-AU results");
  EvaluationReport report;
  report.model = model;
  report.per_au = per_au;
  double f1_sum = 0.0;
  double rate_sum = 0.0;
  for (const auto& [au, m] : per_au) {
    f1_sum += m.f1;
    rate_sum += m.classification_rate;
  }
  const double n = static_cast<double>(per_au.size());
  report.macro_f1 = f1_sum / n;
  report.macro_classification_rate = rate_sum / n;
  return report;
}

std::string report_to_json(const EvaluationReport& report) {
  nlohmann::json j;
  j["model"] = report.model;
  j["macro_f1"] = report.macro_f1;
  j["macro_classification_rate"] = report.macro_classification_rate;
  nlohmann::json per_au_json = nlohmann::json::object();
  for (const auto& [au, m] : report.per_au) {
    nlohmann::json e;
    e["f1"] = m.f1;
    e["classification_rate"] = m.classification_rate;
    e["tp"] = m.counts.tp;
    e["fp"] = m.counts.fp;
    e["tn"] = m.counts.tn;
    e["fn"] = m.counts.fn;
    per_au_json[std::to_string(au)] = e;
  }
  j["per_au"] = per_au_json;
  return j.dump(2) + "\n";
}

EvaluationReport report_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  EvaluationReport report;
  report.model = j.at("model").get<std::string>();
  report.macro_f1 = j.at("macro_f1").get<double>();
  report.macro_classification_rate = j.at("macro_classification_rate").get<double>();
  for (const auto& [key, e] : j.at("per_au").items()) {
    AuMetrics m;
    m.f1 = e.at("f1").get<double>();
    m.classification_rate = e.at("classification_rate").get<double>();
    m.counts.tp = e.at("tp").get<long>();
    m.counts.fp = e.at("fp").get<long>();
    m.counts.tn = e.at("tn").get<long>();
    m.counts.fn = e.at("fn").get<long>();
    report.per_au[std::stoi(key)] = m;
  }
  return report;
}

std::string report_to_text(const EvaluationReport& report) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof(line), "model: %s\n", report.model.c_str());
  out += line;
  std::snprintf(line, sizeof(line), "%-6s %10s %10s %10s %10s %10s %10s\n", "AU", "F1", "rate",
                "tp", "fp", "tn", "fn");
  out += line;
  for (const auto& [au, m] : report.per_au) {
    std::snprintf(line, sizeof(line), "AU%-4d %10.4f %10.4f %10ld %10ld %10ld %10ld\n", au, m.f1,
                  m.classification_rate, m.counts.tp, m.counts.fp, m.counts.tn, m.counts.fn);
    out += line;
  }
  std::snprintf(line, sizeof(line), "%-6s %10.4f %10.4f\n", "macro", report.macro_f1,
                report.macro_classification_rate);
  out += line;
  return out;
}

std::string report_to_csv(const EvaluationReport& report) {
  std::string out = "au,f1,classification_rate,tp,fp,tn,fn\n";
  char line[160];
  for (const auto& [au, m] : report.per_au) {
    std::snprintf(line, sizeof(line), "%d,%.17g,%.17g,%ld,%ld,%ld,%ld\n", au, m.f1,
                  m.classification_rate, m.counts.tp, m.counts.fp, m.counts.tn, m.counts.fn);
    out += line;
  }
  return out;
}

}  // namespace aupipe
