// aupipe: train and evaluate per-AU occurrence classifiers on precomputed
// CNN feature files. Subcommands: synth, train, eval, regions, report.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"

#include "aupipe/pipeline.hpp"
#include "aupipe/synth.hpp"

namespace fs = std::filesystem;
using namespace aupipe;

namespace {

void apply_thread_cap() {
#ifdef _OPENMP
  if (const char* cap = std::getenv("AU_PIPELINE_THREADS")) {
    const int n = std::atoi(cap);
    if (n > 0) omp_set_num_threads(n);
  }
#endif
}

struct ConfigOverrides {
  std::string out_dir;
  std::vector<int> aus;
  int threshold = -1;
  std::int64_t seed = -1;
};

ExperimentConfig load_config_with_overrides(const std::string& path,
                                            const ConfigOverrides& over) {
  ExperimentConfig config = load_experiment_config(path);
  if (!over.out_dir.empty()) config.out_dir = over.out_dir;
  if (!over.aus.empty()) config.au_numbers = over.aus;
  if (over.threshold >= 0) config.threshold = over.threshold;
  if (over.seed >= 0) config.seed = static_cast<std::uint64_t>(over.seed);
  return config;
}

void add_override_flags(CLI::App* cmd, ConfigOverrides& over) {
  cmd->add_option("--out", over.out_dir, "override the configured output directory");
  cmd->add_option("--aus", over.aus, "override the configured AU list");
  cmd->add_option("--threshold", over.threshold, "override the occurrence threshold");
  cmd->add_option("--seed", over.seed, "override the experiment seed");
}

int cmd_synth(const SyntheticSpec& spec, const std::string& out_dir) {
  const SyntheticFiles files = write_synthetic(spec, out_dir);
  std::printf("wrote %zu feature files, %s, %s\n", files.feature_paths.size(),
              files.labels_path.c_str(), files.split_path.c_str());

  // Provenance for the generated corpus (spec hash, no timestamps).
  ExperimentConfig pseudo;
  pseudo.seed = spec.seed;
  pseudo.out_dir = out_dir;
  pseudo.labels_path = files.labels_path;
  pseudo.split_path = files.split_path;
  pseudo.features[spec.network] = (fs::path(out_dir) / "features").string();
  write_provenance(out_dir, "synth", pseudo);
  return kExitOk;
}

int cmd_train(const ExperimentConfig& config) {
  const TrainSummary summary = run_train(config);
  int failures = 0;
  for (const AuOutcome& outcome : summary.outcomes) {
    if (outcome.ok) {
      std::printf("[ ok ] %s/%s AU%-2d  %6.2fs%s\n", outcome.kind.c_str(),
                  outcome.network.c_str(), outcome.au, outcome.seconds,
                  outcome.converged ? "" : "  (not converged)");
    } else {
      ++failures;
      std::printf("[fail] %s/%s AU%-2d  %s\n", outcome.kind.c_str(), outcome.network.c_str(),
                  outcome.au, outcome.error.c_str());
    }
  }
  std::printf("%zu models trained, %d failures; log: %s\n", summary.outcomes.size() - failures,
              failures, summary.log_path.c_str());
  return summary.exit_code;
}

int cmd_eval(const ExperimentConfig& config, const EvalRequest& request) {
  const EvalSummary summary = run_eval(config, request);
  for (const EvaluationReport& report : summary.reports) {
    std::printf("%-28s macro_F1=%.4f macro_rate=%.4f\n", report.model.c_str(), report.macro_f1,
                report.macro_classification_rate);
  }
  for (const std::string& error : summary.errors) {
    std::fprintf(stderr, "error: %s\n", error.c_str());
  }
  return summary.exit_code;
}

int cmd_regions(const ExperimentConfig& config, const std::string& manifest_path) {
  const RegionsSummary summary = run_regions(config, manifest_path);
  std::printf("%zu manifest rows -> %s\n", summary.rows_written,
              summary.manifest_path.c_str());
  for (const std::string& missing : summary.missing) {
    std::fprintf(stderr, "missing landmarks: %s\n", missing.c_str());
  }
  return summary.exit_code;
}

int cmd_report(const std::vector<std::string>& report_paths, bool per_au,
               const std::string& csv_path) {
  std::vector<EvaluationReport> reports;
  for (const std::string& path : report_paths) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open report: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    reports.push_back(report_from_json(text));
  }
  std::printf("%s", render_report_comparison(reports, per_au).c_str());
  if (!csv_path.empty()) {
    std::ofstream out(csv_path, std::ios::trunc);
    if (!out) throw ValidationError("cannot write csv: " + csv_path);
    out << comparison_csv(reports);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  apply_thread_cap();

  CLI::App app{"facial action unit occurrence pipeline"};
  app.require_subcommand(1);

  // synth
  SyntheticSpec synth_spec;
  std::string synth_out = "data";
  CLI::App* synth = app.add_subcommand("synth", "generate a seeded synthetic corpus");
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--subjects", synth_spec.n_subjects, "number of subjects");
  synth->add_option("--frames", synth_spec.frames_per_subject, "frames per subject");
  synth->add_option("--dim", synth_spec.feature_dim, "feature dimension");
  synth->add_option("--separation", synth_spec.class_separation, "class separation");
  synth->add_option("--active-mean", synth_spec.mean_active_run, "mean activation run length");
  synth->add_option("--inactive-mean", synth_spec.mean_inactive_run,
                    "mean inactive run length");
  synth->add_option("--seed", synth_spec.seed, "generator seed");
  synth->add_option("--network", synth_spec.network, "network tag for the feature files");
  bool synth_no_landmarks = false;
  synth->add_flag("--no-landmarks", synth_no_landmarks, "skip landmark generation");

  // train
  std::string train_config_path;
  ConfigOverrides train_over;
  CLI::App* train = app.add_subcommand("train", "train per-AU classifiers");
  train->add_option("--config", train_config_path, "experiment config JSON")->required();
  add_override_flags(train, train_over);

  // eval
  std::string eval_config_path;
  ConfigOverrides eval_over;
  EvalRequest eval_request;
  std::string ensemble_path;
  CLI::App* eval = app.add_subcommand("eval", "evaluate models on the test split");
  eval->add_option("--config", eval_config_path, "experiment config JSON")->required();
  eval->add_option("--models", eval_request.model_paths, "model files to evaluate");
  eval->add_option("--ensemble", ensemble_path, "ensemble spec JSON");
  add_override_flags(eval, eval_over);

  // regions
  std::string regions_config_path;
  std::string manifest_path = "crop_manifest.csv";
  ConfigOverrides regions_over;
  CLI::App* regions = app.add_subcommand("regions", "emit the crop manifest");
  regions->add_option("--config", regions_config_path, "experiment config JSON")->required();
  regions->add_option("--manifest", manifest_path, "manifest output path");
  add_override_flags(regions, regions_over);

  // report
  std::vector<std::string> report_paths;
  bool report_per_au = false;
  std::string report_csv;
  CLI::App* report = app.add_subcommand("report", "compare evaluation reports");
  report->add_option("reports", report_paths, "report JSON files")->required();
  report->add_flag("--per-au", report_per_au, "include the per-AU F1 table");
  report->add_option("--csv", report_csv, "also write a long-format CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      synth_spec.landmarks = !synth_no_landmarks;
      return cmd_synth(synth_spec, synth_out);
    }
    if (train->parsed()) {
      return cmd_train(load_config_with_overrides(train_config_path, train_over));
    }
    if (eval->parsed()) {
      if (!ensemble_path.empty()) eval_request.ensemble_spec_path = ensemble_path;
      return cmd_eval(load_config_with_overrides(eval_config_path, eval_over), eval_request);
    }
    if (regions->parsed()) {
      return cmd_regions(load_config_with_overrides(regions_config_path, regions_over),
                         manifest_path);
    }
    if (report->parsed()) return cmd_report(report_paths, report_per_au, report_csv);
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitTotalFailure;
  }
  return kExitOk;
}
