#include "aupipe/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <unordered_map>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "json.hpp"

#include "aupipe/ensemble.hpp"
#include "aupipe/regions.hpp"
#include "aupipe/rng.hpp"

namespace fs = std::filesystem;

namespace aupipe {

namespace {

// Seed streams for per-AU work items.
constexpr std::uint64_t kBalanceStream = 21;
constexpr std::uint64_t kLstmStream = 22;

nlohmann::json config_to_json(const ExperimentConfig& config) {
  nlohmann::json j;
  j["features"] = config.features;
  j["labels"] = config.labels_path;
  j["landmarks"] = config.landmarks_path;
  j["split"] = config.split_path;
  j["aus"] = config.au_numbers;
  j["threshold"] = config.threshold;
  j["seed"] = config.seed;
  j["out_dir"] = config.out_dir;
  j["sequences"] = {{"pad", config.sequences.pad},
                    {"inactive_min", config.sequences.inactive_min},
                    {"inactive_max", config.sequences.inactive_max}};
  j["region_margin"] = config.region_margin;
  nlohmann::json classifiers = nlohmann::json::array();
  for (const ClassifierSpec& spec : config.classifiers) {
    nlohmann::json c;
    c["kind"] = spec.kind;
    c["network"] = spec.network;
    if (spec.kind == "lstm") {
      c["hidden_units"] = spec.recurrent.hidden_units;
      c["learning_rate"] = spec.recurrent.learning_rate;
      c["momentum"] = spec.recurrent.momentum;
      c["weight_noise_std"] = spec.recurrent.weight_noise_std;
      c["noise_on_bias"] = spec.recurrent.noise_on_bias;
      c["grad_clip"] = spec.recurrent.grad_clip;
      c["epochs"] = spec.recurrent.epochs;
    } else {
      c["cost"] = spec.linear.cost;
      c["tolerance"] = spec.linear.tolerance;
      c["max_epochs"] = spec.linear.max_epochs;
      c["ridge"] = spec.linear.ridge;
    }
    classifiers.push_back(c);
  }
  j["classifiers"] = classifiers;
  return j;
}

Matrix gather_features(const Dataset& dataset, std::span<const std::size_t> indices,
                       const char* op) {
  if (dataset.feature_dim == 0) {
    throw ValidationError(std::string(op) + ": dataset has no features attached");
  }
  Matrix m(indices.size(), dataset.feature_dim);
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const FrameRecord& f = dataset.frames[indices[k]];
    if (f.features.size() != dataset.feature_dim) {
      throw ShapeError(std::string(op) + ": frame without features (subject " + f.subject + ")");
    }
    std::copy(f.features.begin(), f.features.end(), m.row(k));
  }
  return m;
}

std::vector<std::uint8_t> gather_labels(const Dataset& dataset,
                                        std::span<const std::size_t> indices, AuId au,
                                        int threshold) {
  std::vector<std::uint8_t> labels(indices.size());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    labels[k] =
        binarize_intensity(dataset.frames[indices[k]].intensities[au.index()], threshold) ? 1 : 0;
  }
  return labels;
}

std::string au_suffix(int au) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "au%02d", au);
  return buf;
}

// Per-subject positions within an index list, first-appearance order, with
// frame contiguity checked. Used to run recurrent models subject by subject
// while keeping predictions aligned with the evaluation frame order.
struct SubjectRun {
  std::string subject;
  std::vector<std::size_t> positions;
};
std::vector<SubjectRun> subject_runs(const Dataset& dataset,
                                     std::span<const std::size_t> indices) {
  std::vector<SubjectRun> runs;
  std::unordered_map<std::string, std::size_t> where;
  for (std::size_t pos = 0; pos < indices.size(); ++pos) {
    const FrameRecord& f = dataset.frames[indices[pos]];
    auto [it, inserted] = where.try_emplace(f.subject, runs.size());
    if (inserted) runs.push_back(SubjectRun{f.subject, {}});
    runs[it->second].positions.push_back(pos);
  }
  for (const SubjectRun& run : runs) {
    for (std::size_t k = 1; k < run.positions.size(); ++k) {
      const int prev = dataset.frames[indices[run.positions[k - 1]]].frame_index;
      const int cur = dataset.frames[indices[run.positions[k]]].frame_index;
      if (cur != prev + 1) {
        throw ValidationError("subject '" + run.subject + "' has non-contiguous frames");
      }
    }
  }
  return runs;
}

// Predictions of one loaded model over the frames listed by `indices`.
struct ModelOnDisk {
  std::string path;
  bool is_lstm = false;
  LinearModelFile linear;
  lstm::ModelFile recurrent;

  int au() const { return is_lstm ? recurrent.au : linear.au; }
  std::string network() const { return is_lstm ? recurrent.network : linear.network; }
  std::string kind() const { return is_lstm ? "lstm" : linear.kind; }
};

ModelOnDisk load_any_model(const std::string& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw IoError("cannot open model file: " + path);
  char magic[4] = {0, 0, 0, 0};
  probe.read(magic, 4);
  probe.close();
  ModelOnDisk model;
  model.path = path;
  if (std::memcmp(magic, "AULM", 4) == 0) {
    model.is_lstm = true;
    model.recurrent = lstm::load_model(path);
  } else {
    model.linear = load_linear_model(path);
  }
  return model;
}

MemberPrediction predict_with_model(const ModelOnDisk& model, const Dataset& dataset,
                                    std::span<const std::size_t> indices, const std::string& tag) {
  MemberPrediction pred;
  pred.name = tag;
  pred.votes.resize(indices.size());
  pred.scores.resize(indices.size());
  if (model.is_lstm) {
    const lstm::ModelFile& file = model.recurrent;
    for (const SubjectRun& run : subject_runs(dataset, indices)) {
      Matrix seq(run.positions.size(), dataset.feature_dim);
      for (std::size_t k = 0; k < run.positions.size(); ++k) {
        const FrameRecord& f = dataset.frames[indices[run.positions[k]]];
        std::copy(f.features.begin(), f.features.end(), seq.row(k));
      }
      apply_standardizer_inplace(file.standardizer, seq);
      const lstm::Prediction p = lstm::predict_sequence(file.params, seq);
      for (std::size_t k = 0; k < run.positions.size(); ++k) {
        pred.votes[run.positions[k]] = p.votes[k];
        pred.scores[run.positions[k]] = p.scores[k];
      }
    }
  } else {
    const LinearModelFile& file = model.linear;
    for (std::size_t k = 0; k < indices.size(); ++k) {
      const FrameRecord& f = dataset.frames[indices[k]];
      const std::vector<double> x = apply_standardizer_row(file.standardizer, f.features);
      const double score = decision_value(std::span<const double>(file.weights), file.bias, x);
      pred.scores[k] = score;
      pred.votes[k] = predict_from_score(score) ? 1 : 0;
    }
  }
  return pred;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write: " + path);
  out << text;
  if (!out) throw IoError("failed writing: " + path);
}

}  // namespace

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    hash ^= ch;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

ExperimentConfig parse_experiment_config(const std::string& json_text,
                                         const std::string& origin) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("bad config JSON (" + origin + "): " + e.what());
  }
  ExperimentConfig config;
  try {
    if (j.contains("features")) {
      config.features = j.at("features").get<std::map<std::string, std::string>>();
    }
    config.labels_path = j.value("labels", std::string{});
    config.landmarks_path = j.value("landmarks", std::string{});
    config.split_path = j.value("split", std::string{});
    if (j.contains("aus")) {
      config.au_numbers = j.at("aus").get<std::vector<int>>();
    } else {
      config.au_numbers.assign(kAuNumbers.begin(), kAuNumbers.end());
    }
    config.threshold = j.value("threshold", kDefaultThreshold);
    config.seed = j.value("seed", std::uint64_t{0});
    config.out_dir = j.value("out_dir", std::string{});
    if (j.contains("sequences")) {
      const nlohmann::json& s = j.at("sequences");
      config.sequences.pad = s.value("pad", 3);
      config.sequences.inactive_min = s.value("inactive_min", 500);
      config.sequences.inactive_max = s.value("inactive_max", 1000);
    }
    config.region_margin = j.value("region_margin", 0.1);
    for (const nlohmann::json& c : j.value("classifiers", nlohmann::json::array())) {
      ClassifierSpec spec;
      spec.kind = c.at("kind").get<std::string>();
      spec.network = c.at("network").get<std::string>();
      if (spec.kind == "lstm") {
        spec.recurrent.hidden_units = c.value("hidden_units", std::size_t{200});
        spec.recurrent.learning_rate = c.value("learning_rate", 1e-4);
        spec.recurrent.momentum = c.value("momentum", 0.9);
        spec.recurrent.weight_noise_std = c.value("weight_noise_std", 0.1);
        spec.recurrent.noise_on_bias = c.value("noise_on_bias", true);
        spec.recurrent.grad_clip = c.value("grad_clip", 0.0);
        spec.recurrent.epochs = c.value("epochs", 10);
      } else {
        spec.linear.cost = c.value("cost", 1.0);
        spec.linear.tolerance = c.value("tolerance", 1e-6);
        spec.linear.max_epochs = c.value("max_epochs", 1000);
        spec.linear.ridge = c.value("ridge", 1e-6);
      }
      config.classifiers.push_back(std::move(spec));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("config (" + origin + "): " + e.what());
  }
  return config;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_experiment_config(text, path);
}

void validate_experiment_config(const ExperimentConfig& config, bool need_landmarks) {
  if (config.labels_path.empty() || !fs::exists(config.labels_path)) {
    throw ValidationError("label file missing: '" + config.labels_path + "'");
  }
  if (config.split_path.empty() || !fs::exists(config.split_path)) {
    throw ValidationError("split file missing: '" + config.split_path + "'");
  }
  if (need_landmarks && (config.landmarks_path.empty() || !fs::exists(config.landmarks_path))) {
    throw ValidationError("landmark file missing: '" + config.landmarks_path + "'");
  }
  if (!config.landmarks_path.empty() && !fs::exists(config.landmarks_path)) {
    throw ValidationError("landmark file missing: '" + config.landmarks_path + "'");
  }
  if (config.au_numbers.empty()) throw ValidationError("empty AU list");
  for (int au : config.au_numbers) {
    try {
      AuId::from_number(au);
    } catch (const DomainError& e) {
      throw ValidationError(e.what());
    }
  }
  for (const ClassifierSpec& spec : config.classifiers) {
    if (spec.kind != "lda" && spec.kind != "svm" && spec.kind != "lstm") {
      throw ValidationError("unknown classifier kind '" + spec.kind + "'");
    }
    const auto it = config.features.find(spec.network);
    if (it == config.features.end()) {
      throw ValidationError("classifier references network '" + spec.network +
                            "' with no feature directory");
    }
    if (!fs::is_directory(it->second)) {
      throw ValidationError("feature directory missing: '" + it->second + "'");
    }
  }
}

std::string feature_file_path(const std::string& dir, const std::string& subject,
                              const std::string& network) {
  return (fs::path(dir) / (subject + "__" + network + ".aufe")).string();
}

LoadedExperiment load_experiment_data(const ExperimentConfig& config, bool with_landmarks) {
  LoadedExperiment data;
  data.dataset.frames = load_labels(config.labels_path);
  if (with_landmarks) load_landmarks(data.dataset, config.landmarks_path);
  data.split_spec = load_split_spec(config.split_path);
  data.split = make_splits(data.dataset, data.split_spec);
  for (int au : config.au_numbers) data.au_list.push_back(AuId::from_number(au));
  return data;
}

void attach_network_features(Dataset& dataset, const ExperimentConfig& config,
                             const std::string& network) {
  const auto it = config.features.find(network);
  if (it == config.features.end()) {
    throw ValidationError("no feature directory for network '" + network + "'");
  }
  dataset.feature_dim = 0;
  for (const std::string& subject : dataset.subjects()) {
    const std::string path = feature_file_path(it->second, subject, network);
    if (!fs::exists(path)) {
      throw ValidationError("feature file missing for subject '" + subject + "': " + path);
    }
    attach_features(dataset, subject, load_features(path));
  }
}

void write_provenance(const std::string& out_dir, const std::string& command,
                      const ExperimentConfig& config) {
  nlohmann::json j;
  char hash[24];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(fnv1a64(config_to_json(config).dump())));
  j["command"] = command;
  j["config_hash"] = hash;
  j["seed"] = config.seed;
  j["versions"] = {{"aupipe", kProjectVersion},
                   {"feature_format", kFeatureFormatVersion},
                   {"lstm_model_format", lstm::kModelFormatVersion}};
  write_text_file((fs::path(out_dir) / ("provenance_" + command + ".json")).string(),
                  j.dump(2) + "\n");
}

// ---- train -------------------------------------------------------------------

namespace {

struct WorkItem {
  std::size_t classifier = 0;
  AuId au = AuId::from_number(1);
};

AuOutcome train_linear_item(const ExperimentConfig& config, const Dataset& dataset,
                            const Split& split, const ClassifierSpec& spec, AuId au,
                            const std::string& models_dir) {
  AuOutcome outcome;
  outcome.kind = spec.kind;
  outcome.network = spec.network;
  outcome.au = au.number();

  const std::uint64_t balance_seed =
      mix_seed(config.seed, kBalanceStream, static_cast<std::uint64_t>(au.index()));
  const std::vector<std::size_t> picked =
      balance(dataset, split.train, au, config.threshold, balance_seed);
  std::vector<std::size_t> rows;
  rows.reserve(picked.size());
  for (std::size_t pos : picked) rows.push_back(split.train[pos]);

  Matrix x = gather_features(dataset, rows, "train");
  const std::vector<std::uint8_t> y = gather_labels(dataset, rows, au, config.threshold);
  const StandardizationParams standardizer = fit_standardizer(x);
  apply_standardizer_inplace(standardizer, x);

  LinearModelFile file;
  file.kind = spec.kind;
  file.au = au.number();
  file.network = spec.network;
  file.dimension = x.cols;
  file.config = spec.linear;
  file.standardizer = standardizer;
  if (spec.kind == "lda") {
    const LdaModel model = train_lda(x, y, spec.linear.ridge);
    file.weights = model.weights;
    file.bias = model.bias;
  } else {
    const SvmModel model = train_svm(x, y, spec.linear);
    file.weights = model.weights;
    file.bias = model.bias;
    file.convergence_flag = model.converged;
    outcome.converged = model.converged;
  }
  outcome.model_path =
      (fs::path(models_dir) / (spec.kind + "_" + spec.network + "_" + au_suffix(au.number()) +
                               ".json"))
          .string();
  save_linear_model(outcome.model_path, file);
  outcome.ok = true;
  return outcome;
}

AuOutcome train_lstm_item(const ExperimentConfig& config, const Dataset& dataset,
                          const Split& split, const ClassifierSpec& spec, AuId au,
                          const StandardizationParams& standardizer,
                          const std::string& models_dir) {
  AuOutcome outcome;
  outcome.kind = "lstm";
  outcome.network = spec.network;
  outcome.au = au.number();

  SequenceBatch train_batch =
      build_sequences(dataset, split.train, au, config.threshold, config.sequences.pad,
                      config.sequences.inactive_min, config.sequences.inactive_max);
  if (train_batch.sequences.empty()) {
    throw InsufficientDataError("no training sequences for AU" + std::to_string(au.number()));
  }
  for (LabeledSequence& seq : train_batch.sequences) {
    apply_standardizer_inplace(standardizer, seq.features);
  }

  SequenceBatch val_batch =
      build_sequences(dataset, split.val, au, config.threshold, config.sequences.pad,
                      config.sequences.inactive_min, config.sequences.inactive_max);
  for (LabeledSequence& seq : val_batch.sequences) {
    apply_standardizer_inplace(standardizer, seq.features);
  }

  lstm::Config model_config = spec.recurrent;
  model_config.input_dim = dataset.feature_dim;
  model_config.seed = mix_seed(config.seed, kLstmStream, static_cast<std::uint64_t>(au.index()));

  // Checkpoint selection: F1 over all validation sequence frames.
  std::function<double(const lstm::Params&)> val_metric;
  if (!val_batch.sequences.empty()) {
    val_metric = [&val_batch](const lstm::Params& params) {
      ConfusionCounts counts;
      for (const LabeledSequence& seq : val_batch.sequences) {
        const lstm::Prediction p = lstm::predict_sequence(params, seq.features);
        for (std::size_t t = 0; t < seq.labels.size(); ++t) {
          const bool pred = p.votes[t] != 0;
          const bool truth = seq.labels[t] != 0;
          if (pred && truth)
            ++counts.tp;
          else if (pred && !truth)
            ++counts.fp;
          else if (!pred && truth)
            ++counts.fn;
          else
            ++counts.tn;
        }
      }
      return f1_score(counts);
    };
  }

  const lstm::TrainResult result = lstm::train(train_batch.sequences, model_config, val_metric);

  lstm::ModelFile file;
  file.config = model_config;
  file.au = au.number();
  file.network = spec.network;
  file.best_epoch = result.best_epoch;
  file.loss_history = result.loss_history;
  file.standardizer = standardizer;
  file.params = result.params;
  outcome.model_path =
      (fs::path(models_dir) / ("lstm_" + spec.network + "_" + au_suffix(au.number()) + ".aulstm"))
          .string();
  lstm::save_model(outcome.model_path, file);
  outcome.ok = true;
  return outcome;
}

}  // namespace

TrainSummary run_train(const ExperimentConfig& config) {
  validate_experiment_config(config);
  if (config.classifiers.empty()) throw ValidationError("no classifiers configured");
  if (config.out_dir.empty()) throw ValidationError("out_dir is required");

  LoadedExperiment data = load_experiment_data(config, false);
  const std::string models_dir = (fs::path(config.out_dir) / "models").string();
  fs::create_directories(models_dir);

  TrainSummary summary;

  // Group classifiers by network so each feature space is attached once.
  std::vector<std::string> networks;
  for (const ClassifierSpec& spec : config.classifiers) {
    if (std::find(networks.begin(), networks.end(), spec.network) == networks.end()) {
      networks.push_back(spec.network);
    }
  }

  for (const std::string& network : networks) {
    attach_network_features(data.dataset, config, network);

    // The recurrent models share one standardizer fitted on the whole
    // training split; balancing would break the temporal runs they need.
    StandardizationParams lstm_standardizer;
    bool has_lstm = false;
    for (const ClassifierSpec& spec : config.classifiers) {
      if (spec.network == network && spec.kind == "lstm") has_lstm = true;
    }
    if (has_lstm) {
      const Matrix train_matrix = gather_features(data.dataset, data.split.train, "train");
      lstm_standardizer = fit_standardizer(train_matrix);
    }

    std::vector<WorkItem> items;
    for (std::size_t c = 0; c < config.classifiers.size(); ++c) {
      if (config.classifiers[c].network != network) continue;
      for (AuId au : data.au_list) items.push_back(WorkItem{c, au});
    }
    std::vector<AuOutcome> outcomes(items.size());

#pragma omp parallel for schedule(dynamic)
    for (std::size_t k = 0; k < items.size(); ++k) {
      const ClassifierSpec& spec = config.classifiers[items[k].classifier];
      const auto started = std::chrono::steady_clock::now();
      try {
        if (spec.kind == "lstm") {
          outcomes[k] = train_lstm_item(config, data.dataset, data.split, spec, items[k].au,
                                        lstm_standardizer, models_dir);
        } else {
          outcomes[k] =
              train_linear_item(config, data.dataset, data.split, spec, items[k].au, models_dir);
        }
      } catch (const std::exception& e) {
        outcomes[k].kind = spec.kind;
        outcomes[k].network = spec.network;
        outcomes[k].au = items[k].au.number();
        outcomes[k].ok = false;
        outcomes[k].error = e.what();
      }
      outcomes[k].seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    }
    summary.outcomes.insert(summary.outcomes.end(), outcomes.begin(), outcomes.end());
  }

  // Training log: timings are wall-clock and vary run to run, so the log is
  // not part of the bit-reproducible output set.
  nlohmann::json log = nlohmann::json::array();
  std::size_t failures = 0;
  for (const AuOutcome& outcome : summary.outcomes) {
    nlohmann::json e;
    e["kind"] = outcome.kind;
    e["network"] = outcome.network;
    e["au"] = outcome.au;
    e["ok"] = outcome.ok;
    e["converged"] = outcome.converged;
    e["seconds"] = outcome.seconds;
    e["model"] = outcome.model_path;
    if (!outcome.error.empty()) e["error"] = outcome.error;
    log.push_back(e);
    if (!outcome.ok) ++failures;
  }
  summary.log_path = (fs::path(config.out_dir) / "train_log.json").string();
  write_text_file(summary.log_path, log.dump(2) + "\n");
  write_provenance(config.out_dir, "train", config);

  if (failures == summary.outcomes.size() && failures > 0) {
    summary.exit_code = kExitTotalFailure;
  } else if (failures > 0) {
    summary.exit_code = kExitPartialFailure;
  }
  return summary;
}

// ---- eval --------------------------------------------------------------------

EnsembleSpecFile load_ensemble_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open ensemble spec: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("bad ensemble spec JSON: " + path + ": " + e.what());
  }
  EnsembleSpecFile spec;
  try {
    spec.name = j.value("name", std::string{"ensemble"});
    for (const nlohmann::json& m : j.at("members")) {
      EnsembleMemberSpec member;
      member.family = m.at("family").get<std::string>();
      for (const auto& [au_text, path_json] : m.at("models").items()) {
        member.model_paths[std::stoi(au_text)] = path_json.get<std::string>();
      }
      spec.members.push_back(std::move(member));
    }
  } catch (const std::exception& e) {
    throw ValidationError("ensemble spec (" + path + "): " + e.what());
  }
  if (spec.members.size() < 2) {
    throw ValidationError("ensemble spec needs at least 2 members: " + path);
  }
  return spec;
}

EvalSummary run_eval(const ExperimentConfig& config, const EvalRequest& request) {
  validate_experiment_config(config);
  if (config.out_dir.empty()) throw ValidationError("out_dir is required");
  if (request.model_paths.empty() && !request.ensemble_spec_path) {
    throw ValidationError("nothing to evaluate: no models and no ensemble spec");
  }
  for (const std::string& path : request.model_paths) {
    if (!fs::exists(path)) throw ValidationError("model file missing: " + path);
  }
  std::optional<EnsembleSpecFile> ensemble_spec;
  if (request.ensemble_spec_path) {
    ensemble_spec = load_ensemble_spec(*request.ensemble_spec_path);
    for (const EnsembleMemberSpec& member : ensemble_spec->members) {
      for (const auto& [au, path] : member.model_paths) {
        if (!fs::exists(path)) {
          throw ValidationError("ensemble member '" + member.family + "' model missing: " + path);
        }
      }
    }
  }

  LoadedExperiment data = load_experiment_data(config, false);
  fs::create_directories(config.out_dir);
  EvalSummary summary;
  std::string attached_network;  // lazily switch feature spaces
  const auto ensure_network = [&](const std::string& network) {
    if (attached_network == network) return;
    attach_network_features(data.dataset, config, network);
    attached_network = network;
  };

  const std::vector<std::size_t>& test_indices = data.split.test;
  if (test_indices.empty()) throw ValidationError("test split is empty");

  // Ground-truth labels per AU over the test frames.
  const auto truth_for = [&](AuId au) {
    return gather_labels(data.dataset, test_indices, au, config.threshold);
  };

  // ---- individual model sets, grouped by kind/network ----
  std::map<std::string, std::map<int, ModelOnDisk>> groups;
  for (const std::string& path : request.model_paths) {
    ModelOnDisk model = load_any_model(path);
    const std::string key = model.kind() + "_" + model.network();
    auto [it, inserted] = groups[key].try_emplace(model.au(), std::move(model));
    if (!inserted) {
      throw ValidationError("duplicate model for AU" + std::to_string(it->first) +
                            " in set '" + key + "'");
    }
  }

  std::size_t failed_groups = 0;
  std::size_t total_groups = 0;
  for (const auto& [set_name, by_au] : groups) {
    ++total_groups;
    try {
      std::map<int, AuMetrics> per_au;
      for (const auto& [au_number, model] : by_au) {
        if (std::find(config.au_numbers.begin(), config.au_numbers.end(), au_number) ==
            config.au_numbers.end()) {
          continue;
        }
        const AuId au = AuId::from_number(au_number);
        ensure_network(model.network());
        const MemberPrediction pred =
            predict_with_model(model, data.dataset, test_indices, set_name);
        const std::vector<std::uint8_t> labels = truth_for(au);
        per_au[au_number] = metrics_from_counts(confusion(pred.votes, labels));
      }
      if (per_au.empty()) {
        throw ValidationError("model set '" + set_name + "' covers none of the configured AUs");
      }
      const EvaluationReport report = macro_report(set_name, per_au);
      const std::string base = (fs::path(config.out_dir) / ("report_" + set_name)).string();
      write_text_file(base + ".json", report_to_json(report));
      write_text_file(base + ".txt", report_to_text(report));
      write_text_file(base + ".csv", report_to_csv(report));
      summary.reports.push_back(report);
      summary.report_paths.push_back(base + ".json");
    } catch (const std::exception& e) {
      ++failed_groups;
      summary.errors.push_back("model set '" + set_name + "': " + e.what());
    }
  }

  // ---- ensemble ----
  if (ensemble_spec) {
    ++total_groups;
    try {
      std::map<int, AuMetrics> per_au;
      std::string audit = "subject,frame,au,decision";
      for (std::size_t m = 0; m < ensemble_spec->members.size(); ++m) {
        audit += ",vote_" + std::to_string(m + 1);
      }
      for (std::size_t m = 0; m < ensemble_spec->members.size(); ++m) {
        audit += ",score_" + std::to_string(m + 1);
      }
      audit += "\n";

      for (int au_number : config.au_numbers) {
        const AuId au = AuId::from_number(au_number);
        std::vector<MemberPrediction> members;
        for (const EnsembleMemberSpec& member : ensemble_spec->members) {
          const auto it = member.model_paths.find(au_number);
          if (it == member.model_paths.end()) {
            throw ValidationError("member '" + member.family + "' has no model for AU" +
                                  std::to_string(au_number));
          }
          try {
            const ModelOnDisk model = load_any_model(it->second);
            ensure_network(model.network());
            members.push_back(
                predict_with_model(model, data.dataset, test_indices, member.family));
          } catch (const std::exception& e) {
            throw ValidationError("member '" + member.family + "' failed on AU" +
                                  std::to_string(au_number) + ": " + e.what());
          }
        }
        const EnsemblePrediction vote = ensemble_predict(members);
        const std::vector<std::uint8_t> labels = truth_for(au);
        per_au[au_number] = metrics_from_counts(confusion(vote.decisions, labels));

        char buf[64];
        for (std::size_t k = 0; k < test_indices.size(); ++k) {
          const FrameRecord& f = data.dataset.frames[test_indices[k]];
          audit += f.subject + "," + std::to_string(f.frame_index) + "," +
                   std::to_string(au_number) + "," + std::to_string(int(vote.decisions[k]));
          for (std::uint8_t v : vote.records[k].member_votes) {
            audit += "," + std::to_string(int(v));
          }
          for (double s : vote.records[k].member_scores) {
            std::snprintf(buf, sizeof(buf), ",%.17g", s);
            audit += buf;
          }
          audit += "\n";
        }
      }
      const std::string name = "ensemble_" + ensemble_spec->name;
      const EvaluationReport report = macro_report(name, per_au);
      const std::string base = (fs::path(config.out_dir) / ("report_" + name)).string();
      write_text_file(base + ".json", report_to_json(report));
      write_text_file(base + ".txt", report_to_text(report));
      write_text_file(base + ".csv", report_to_csv(report));
      write_text_file((fs::path(config.out_dir) / (name + "_audit.csv")).string(), audit);
      summary.reports.push_back(report);
      summary.report_paths.push_back(base + ".json");
    } catch (const std::exception& e) {
      ++failed_groups;
      summary.errors.push_back(std::string("ensemble: ") + e.what());
    }
  }

  write_provenance(config.out_dir, "eval", config);
  if (failed_groups == total_groups && total_groups > 0) {
    summary.exit_code = kExitTotalFailure;
  } else if (failed_groups > 0) {
    summary.exit_code = kExitPartialFailure;
  }
  return summary;
}

// ---- regions -----------------------------------------------------------------

RegionsSummary run_regions(const ExperimentConfig& config, const std::string& manifest_path) {
  validate_experiment_config(config, /*need_landmarks=*/true);
  LoadedExperiment data = load_experiment_data(config, /*with_landmarks=*/true);
  fs::create_directories(fs::path(manifest_path).parent_path().empty()
                             ? fs::path(".")
                             : fs::path(manifest_path).parent_path());
  const CropManifestResult result =
      emit_crop_manifest(data.dataset, data.au_list, manifest_path, config.region_margin);
  RegionsSummary summary;
  summary.rows_written = result.rows_written;
  summary.missing = result.missing;
  summary.manifest_path = manifest_path;
  summary.exit_code = result.missing.empty() ? kExitOk : kExitPartialFailure;
  if (!config.out_dir.empty()) {
    fs::create_directories(config.out_dir);
    write_provenance(config.out_dir, "regions", config);
  }
  return summary;
}

// ---- report ------------------------------------------------------------------

std::string render_report_comparison(const std::vector<EvaluationReport>& reports, bool per_au) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-28s %10s %10s\n", "model", "macro_F1", "macro_rate");
  out += line;
  for (const EvaluationReport& report : reports) {
    std::snprintf(line, sizeof(line), "%-28s %10.4f %10.4f\n", report.model.c_str(),
                  report.macro_f1, report.macro_classification_rate);
    out += line;
  }
  if (per_au) {
    out += "\nper-AU F1\n";
    std::set<int> aus;
    for (const EvaluationReport& report : reports) {
      for (const auto& [au, m] : report.per_au) aus.insert(au);
    }
    std::snprintf(line, sizeof(line), "%-6s", "AU");
    out += line;
    for (const EvaluationReport& report : reports) {
      std::snprintf(line, sizeof(line), " %20s", report.model.substr(0, 20).c_str());
      out += line;
    }
    out += "\n";
    for (int au : aus) {
      std::snprintf(line, sizeof(line), "AU%-4d", au);
      out += line;
      for (const EvaluationReport& report : reports) {
        const auto it = report.per_au.find(au);
        if (it == report.per_au.end()) {
          std::snprintf(line, sizeof(line), " %20s", "-");
        } else {
          std::snprintf(line, sizeof(line), " %20.4f", it->second.f1);
        }
        out += line;
      }
      out += "\n";
    }
  }
  return out;
}

std::string comparison_csv(const std::vector<EvaluationReport>& reports) {
  std::string out = "model,au,f1,classification_rate\n";
  char line[160];
  for (const EvaluationReport& report : reports) {
    for (const auto& [au, m] : report.per_au) {
      std::snprintf(line, sizeof(line), "%s,%d,%.17g,%.17g\n", report.model.c_str(), au, m.f1,
                    m.classification_rate);
      out += line;
    }
    std::snprintf(line, sizeof(line), "%s,macro,%.17g,%.17g\n", report.model.c_str(),
                  report.macro_f1, report.macro_classification_rate);
    out += line;
  }
  return out;
}

}  // namespace aupipe
