#include "aupipe/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

#include "aupipe/kernels.hpp"
#include "aupipe/rng.hpp"

namespace aupipe {

namespace {

constexpr char kFeatureMagic[4] = {'A', 'U', 'F', 'E'};

std::uint32_t read_u32_le(std::istream& in, const char* what) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) {
    throw FormatError(std::string("feature file truncated while reading ") + what);
  }
  return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 |
         std::uint32_t(b[3]) << 24;
}

void write_u32_le(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

int parse_int(const std::string& s, const std::string& context) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw FormatError("expected an integer, got '" + s + "' (" + context + ")");
  }
}

double parse_double(const std::string& s, const std::string& context) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw FormatError("expected a number, got '" + s + "' (" + context + ")");
  }
}

std::string label_header() {
  std::string h = "subject,frame";
  for (int au : kAuNumbers) h += ",au" + std::to_string(au);
  return h;
}

std::string landmark_header() {
  std::string h = "subject,frame";
  for (std::size_t i = 0; i < kLandmarkCount; ++i) {
    h += ",x" + std::to_string(i) + ",y" + std::to_string(i);
  }
  return h;
}

// (subject, frame) -> dataset row, for landmark attachment.
std::unordered_map<std::string, std::size_t> frame_lookup(const Dataset& dataset) {
  std::unordered_map<std::string, std::size_t> lookup;
  lookup.reserve(dataset.frames.size());
  for (std::size_t i = 0; i < dataset.frames.size(); ++i) {
    const FrameRecord& f = dataset.frames[i];
    lookup[f.subject + "\n" + std::to_string(f.frame_index)] = i;
  }
  return lookup;
}

struct SubjectGroup {
  std::string subject;
  std::vector<std::size_t> indices;  // positions into the caller's frame_indices span
};

// Groups split positions by subject in first-appearance order and checks that
// each subject's frames are contiguous by frame_index.
std::vector<SubjectGroup> group_contiguous(const Dataset& dataset,
                                           std::span<const std::size_t> frame_indices,
                                           const char* op) {
  std::vector<SubjectGroup> groups;
  std::unordered_map<std::string, std::size_t> by_subject;
  for (std::size_t pos = 0; pos < frame_indices.size(); ++pos) {
    const FrameRecord& f = dataset.frames.at(frame_indices[pos]);
    auto [it, inserted] = by_subject.try_emplace(f.subject, groups.size());
    if (inserted) groups.push_back(SubjectGroup{f.subject, {}});
    groups[it->second].indices.push_back(pos);
  }
  for (const SubjectGroup& g : groups) {
    for (std::size_t k = 1; k < g.indices.size(); ++k) {
      const int prev = dataset.frames[frame_indices[g.indices[k - 1]]].frame_index;
      const int cur = dataset.frames[frame_indices[g.indices[k]]].frame_index;
      if (cur != prev + 1) {
        throw ValidationError(std::string(op) + ": frames of subject '" + g.subject +
                              "' are not contiguous (" + std::to_string(prev) + " then " +
                              std::to_string(cur) + ")");
      }
    }
  }
  return groups;
}

struct Interval {
  int begin = 0;  // inclusive positions into a subject's frame list
  int end = 0;    // inclusive
  int length() const { return end - begin + 1; }
};

LabeledSequence make_sequence(const Dataset& dataset, std::span<const std::size_t> frame_indices,
                              const SubjectGroup& group, Interval iv,
                              const std::vector<std::uint8_t>& labels) {
  const std::size_t first_row = frame_indices[group.indices[iv.begin]];
  LabeledSequence seq;
  seq.subject = group.subject;
  seq.start_frame = dataset.frames[first_row].frame_index;
  const std::size_t dim = dataset.feature_dim;
  seq.features = Matrix(static_cast<std::size_t>(iv.length()), dim);
  seq.labels.resize(static_cast<std::size_t>(iv.length()));
  for (int t = iv.begin; t <= iv.end; ++t) {
    const std::size_t row = frame_indices[group.indices[t]];
    const FrameRecord& f = dataset.frames[row];
    if (f.features.size() != dim) {
      throw ShapeError("sequence construction: frame without a " + std::to_string(dim) +
                       "-dimensional feature vector");
    }
    std::copy(f.features.begin(), f.features.end(), seq.features.row(t - iv.begin));
    seq.labels[t - iv.begin] = labels[static_cast<std::size_t>(t)];
  }
  return seq;
}

}  // namespace

std::vector<std::string> Dataset::subjects() const {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const FrameRecord& f : frames) {
    if (seen.insert(f.subject).second) out.push_back(f.subject);
  }
  return out;
}

// ---- file formats ----------------------------------------------------------

Matrix load_features(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open feature file: " + path);
  char magic[4];
  if (!in.read(magic, 4)) throw FormatError("feature file too short for magic: " + path);
  if (std::memcmp(magic, kFeatureMagic, 4) != 0) {
    throw FormatError("bad magic in feature file: " + path);
  }
  const std::uint32_t version = read_u32_le(in, "version");
  if (version != kFeatureFormatVersion) {
    throw FormatError("unsupported feature format version " + std::to_string(version) + ": " +
                      path);
  }
  const std::uint32_t rows = read_u32_le(in, "row count");
  const std::uint32_t cols = read_u32_le(in, "dimension");
  Matrix m(rows, cols);
  std::vector<unsigned char> buf(static_cast<std::size_t>(cols) * 4);
  for (std::uint32_t r = 0; r < rows; ++r) {
    if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()))) {
      throw FormatError("feature payload truncated at row " + std::to_string(r) + ": " + path);
    }
    for (std::uint32_t c = 0; c < cols; ++c) {
      const std::uint32_t bits = std::uint32_t(buf[c * 4]) | std::uint32_t(buf[c * 4 + 1]) << 8 |
                                 std::uint32_t(buf[c * 4 + 2]) << 16 |
                                 std::uint32_t(buf[c * 4 + 3]) << 24;
      m(r, c) = static_cast<double>(std::bit_cast<float>(bits));
    }
  }
  if (in.get() != std::ifstream::traits_type::eof()) {
    throw FormatError("trailing bytes after feature payload: " + path);
  }
  return m;
}

void write_features(const std::string& path, const Matrix& m) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write feature file: " + path);
  out.write(kFeatureMagic, 4);
  write_u32_le(out, kFeatureFormatVersion);
  write_u32_le(out, static_cast<std::uint32_t>(m.rows));
  write_u32_le(out, static_cast<std::uint32_t>(m.cols));
  std::vector<unsigned char> buf(m.cols * 4);
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t c = 0; c < m.cols; ++c) {
      const std::uint32_t bits = std::bit_cast<std::uint32_t>(static_cast<float>(m(r, c)));
      buf[c * 4] = static_cast<unsigned char>(bits);
      buf[c * 4 + 1] = static_cast<unsigned char>(bits >> 8);
      buf[c * 4 + 2] = static_cast<unsigned char>(bits >> 16);
      buf[c * 4 + 3] = static_cast<unsigned char>(bits >> 24);
    }
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  }
  if (!out) throw IoError("failed writing feature file: " + path);
}

std::vector<FrameRecord> load_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open label file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty label file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != label_header()) {
    throw FormatError("bad label header, expected '" + label_header() + "': " + path);
  }
  std::vector<FrameRecord> frames;
  std::unordered_map<std::string, int> last_frame;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    const std::string ctx = path + ":" + std::to_string(line_no);
    if (fields.size() != 2 + kAuCount) {
      throw FormatError("expected " + std::to_string(2 + kAuCount) + " fields, got " +
                        std::to_string(fields.size()) + " (" + ctx + ")");
    }
    FrameRecord f;
    f.subject = fields[0];
    if (f.subject.empty()) throw FormatError("empty subject id (" + ctx + ")");
    f.frame_index = parse_int(fields[1], ctx);
    if (f.frame_index < 0) throw FormatError("negative frame index (" + ctx + ")");
    auto [it, inserted] = last_frame.try_emplace(f.subject, f.frame_index);
    if (!inserted) {
      if (f.frame_index <= it->second) {
        throw FormatError("frame indices of subject '" + f.subject +
                          "' must be strictly increasing (" + ctx + ")");
      }
      it->second = f.frame_index;
    }
    for (std::size_t a = 0; a < kAuCount; ++a) {
      const int intensity = parse_int(fields[2 + a], ctx);
      if (intensity < kIntensityMin || intensity > kIntensityMax) {
        throw DomainError("intensity " + std::to_string(intensity) + " outside [0,5] (" + ctx +
                          ")");
      }
      f.intensities[a] = intensity;
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

void write_labels(const std::string& path, const std::vector<FrameRecord>& frames) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write label file: " + path);
  out << label_header() << "\n";
  for (const FrameRecord& f : frames) {
    out << f.subject << ',' << f.frame_index;
    for (int v : f.intensities) out << ',' << v;
    out << "\n";
  }
  if (!out) throw IoError("failed writing label file: " + path);
}

void load_landmarks(Dataset& dataset, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open landmark file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty landmark file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != landmark_header()) {
    throw FormatError("bad landmark header: " + path);
  }
  const auto lookup = frame_lookup(dataset);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    const std::string ctx = path + ":" + std::to_string(line_no);
    if (fields.size() != 2 + 2 * kLandmarkCount) {
      throw FormatError("expected " + std::to_string(2 + 2 * kLandmarkCount) + " fields (" + ctx +
                        ")");
    }
    const std::string key = fields[0] + "\n" + fields[1];
    const auto it = lookup.find(key);
    if (it == lookup.end()) {
      throw ValidationError("landmark row for unknown frame (" + fields[0] + ", " + fields[1] +
                            ") (" + ctx + ")");
    }
    std::vector<Point2> pts(kLandmarkCount);
    for (std::size_t p = 0; p < kLandmarkCount; ++p) {
      pts[p].x = parse_double(fields[2 + 2 * p], ctx);
      pts[p].y = parse_double(fields[3 + 2 * p], ctx);
    }
    dataset.frames[it->second].landmarks = std::move(pts);
  }
}

void write_landmarks(const std::string& path, const Dataset& dataset) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write landmark file: " + path);
  out << landmark_header() << "\n";
  char buf[32];
  for (const FrameRecord& f : dataset.frames) {
    if (!f.landmarks) continue;
    out << f.subject << ',' << f.frame_index;
    for (const Point2& p : *f.landmarks) {
      std::snprintf(buf, sizeof(buf), ",%.3f,%.3f", p.x, p.y);
      out << buf;
    }
    out << "\n";
  }
  if (!out) throw IoError("failed writing landmark file: " + path);
}

SplitSpec load_split_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open split file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("bad split JSON: " + path + ": " + e.what());
  }
  SplitSpec spec;
  try {
    spec.train = j.at("train").get<std::vector<std::string>>();
    spec.val = j.at("val").get<std::vector<std::string>>();
    spec.test = j.at("test").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("split JSON needs train/val/test string arrays: " + path + ": " + e.what());
  }
  return spec;
}

void write_split_spec(const std::string& path, const SplitSpec& spec) {
  nlohmann::json j;
  j["train"] = spec.train;
  j["val"] = spec.val;
  j["test"] = spec.test;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write split file: " + path);
  out << j.dump(2) << "\n";
}

void attach_features(Dataset& dataset, const std::string& subject, const Matrix& features) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < dataset.frames.size(); ++i) {
    if (dataset.frames[i].subject == subject) rows.push_back(i);
  }
  if (rows.empty()) throw ValidationError("attach_features: unknown subject '" + subject + "'");
  if (rows.size() != features.rows) {
    throw ShapeError("attach_features: subject '" + subject + "' has " +
                     std::to_string(rows.size()) + " frames but the feature matrix has " +
                     std::to_string(features.rows) + " rows");
  }
  if (dataset.feature_dim == 0) dataset.feature_dim = features.cols;
  if (dataset.feature_dim != features.cols) {
    throw ShapeError("attach_features: dimension " + std::to_string(features.cols) +
                     " does not match dataset dimension " + std::to_string(dataset.feature_dim));
  }
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const double* src = features.row(k);
    dataset.frames[rows[k]].features.assign(src, src + features.cols);
  }
}

// ---- operations -------------------------------------------------------------

bool binarize_intensity(int intensity, int threshold) {
  if (intensity < kIntensityMin || intensity > kIntensityMax) {
    throw DomainError("intensity " + std::to_string(intensity) + " outside [0,5]");
  }
  return intensity >= threshold;
}

long count_activations(const Dataset& dataset, AuId au, int threshold) {
  long count = 0;
  for (const FrameRecord& f : dataset.frames) {
    if (binarize_intensity(f.intensities[au.index()], threshold)) ++count;
  }
  return count;
}

SplitSpec default_split_spec(const std::vector<std::string>& subjects) {
  const std::size_t n = subjects.size();
  if (n < 3) throw ValidationError("default split needs at least 3 subjects");
  std::size_t n_train = 12, n_val = 6, n_test = 9;
  if (n != 27) {
    n_val = std::max<std::size_t>(1, (n * 6 + 13) / 27);
    n_test = std::max<std::size_t>(1, (n * 9 + 13) / 27);
    if (n_val + n_test >= n) throw ValidationError("too few subjects for a 12/6/9-style split");
    n_train = n - n_val - n_test;
  }
  SplitSpec spec;
  spec.train.assign(subjects.begin(), subjects.begin() + n_train);
  spec.val.assign(subjects.begin() + n_train, subjects.begin() + n_train + n_val);
  spec.test.assign(subjects.begin() + n_train + n_val, subjects.end());
  return spec;
}

Split make_splits(const Dataset& dataset, const SplitSpec& spec) {
  enum : int { kTrain = 0, kVal = 1, kTest = 2 };
  std::unordered_map<std::string, int> assignment;
  const auto add = [&](const std::vector<std::string>& subjects, int which, const char* name) {
    for (const std::string& s : subjects) {
      auto [it, inserted] = assignment.try_emplace(s, which);
      if (!inserted) {
        throw ValidationError("subject '" + s + "' appears in more than one split (" + name + ")");
      }
    }
  };
  add(spec.train, kTrain, "train");
  add(spec.val, kVal, "val");
  add(spec.test, kTest, "test");

  const std::vector<std::string> loaded = dataset.subjects();
  std::unordered_set<std::string> loaded_set(loaded.begin(), loaded.end());
  for (const auto& [subject, which] : assignment) {
    if (!loaded_set.count(subject)) {
      throw ValidationError("split names unknown subject '" + subject + "'");
    }
  }
  for (const std::string& subject : loaded) {
    if (!assignment.count(subject)) {
      throw ValidationError("subject '" + subject + "' is not assigned to any split");
    }
  }

  Split split;
  for (std::size_t i = 0; i < dataset.frames.size(); ++i) {
    switch (assignment.at(dataset.frames[i].subject)) {
      case kTrain: split.train.push_back(i); break;
      case kVal: split.val.push_back(i); break;
      default: split.test.push_back(i); break;
    }
  }
  return split;
}

std::vector<std::size_t> balance(const Dataset& dataset,
                                 std::span<const std::size_t> frame_indices, AuId au,
                                 int threshold, std::uint64_t seed) {
  std::vector<std::size_t> positives;
  std::vector<std::size_t> negatives;
  for (std::size_t pos = 0; pos < frame_indices.size(); ++pos) {
    const FrameRecord& f = dataset.frames.at(frame_indices[pos]);
    if (binarize_intensity(f.intensities[au.index()], threshold)) {
      positives.push_back(pos);
    } else {
      negatives.push_back(pos);
    }
  }
  if (positives.empty()) {
    throw InsufficientDataError("balance: AU" + std::to_string(au.number()) +
                                " has no positive frames");
  }
  std::vector<std::size_t> selected = positives;
  if (negatives.size() <= positives.size()) {
    selected.insert(selected.end(), negatives.begin(), negatives.end());
  } else {
    Rng rng(seed);
    for (std::size_t k : rng.sample_indices(negatives.size(), positives.size())) {
      selected.push_back(negatives[k]);
    }
  }
  std::sort(selected.begin(), selected.end());
  return selected;
}

StandardizationParams fit_standardizer(const Matrix& train_features) {
  if (train_features.rows < 2) {
    throw InsufficientDataError("fit_standardizer: need at least 2 rows, got " +
                                std::to_string(train_features.rows));
  }
  const std::size_t n = train_features.rows;
  const std::size_t d = train_features.cols;
  StandardizationParams params;
  params.mean.resize(d);
  params.stddev.resize(d);
  kernels::column_mean(train_features.data.data(), n, d, params.mean.data());
  // Two-pass population variance; exact zeros survive so the constant-column
  // rule below can fire.
  for (std::size_t j = 0; j < d; ++j) {
    double acc = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double delta = train_features(r, j) - params.mean[j];
      acc += delta * delta;
    }
    const double stddev = std::sqrt(acc / static_cast<double>(n));
    params.stddev[j] = stddev > 0.0 ? stddev : 1.0;
  }
  return params;
}

void apply_standardizer_inplace(const StandardizationParams& params, Matrix& features) {
  if (features.cols != params.mean.size()) {
    throw ShapeError("apply_standardizer: feature dimension " + std::to_string(features.cols) +
                     " vs params dimension " + std::to_string(params.mean.size()));
  }
  kernels::standardize_rows(features.data.data(), features.rows, features.cols,
                            params.mean.data(), params.stddev.data());
}

Matrix apply_standardizer(const StandardizationParams& params, const Matrix& features) {
  Matrix out = features;
  apply_standardizer_inplace(params, out);
  return out;
}

std::vector<double> apply_standardizer_row(const StandardizationParams& params,
                                           std::span<const double> row) {
  if (row.size() != params.mean.size()) {
    throw ShapeError("apply_standardizer: row dimension " + std::to_string(row.size()) +
                     " vs params dimension " + std::to_string(params.mean.size()));
  }
  std::vector<double> out(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) {
    out[j] = (row[j] - params.mean[j]) / params.stddev[j];
  }
  return out;
}

SequenceBatch build_sequences(const Dataset& dataset, std::span<const std::size_t> frame_indices,
                              AuId au, int threshold, int pad, int inactive_min,
                              int inactive_max) {
  if (pad < 0) throw ValidationError("build_sequences: pad must be >= 0");
  if (inactive_min <= 0 || inactive_max < inactive_min) {
    throw ValidationError("build_sequences: need 0 < inactive_min <= inactive_max");
  }
  SequenceBatch batch{au, {}};
  for (const SubjectGroup& group :
       group_contiguous(dataset, frame_indices, "build_sequences")) {
    const int n = static_cast<int>(group.indices.size());
    std::vector<std::uint8_t> labels(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t) {
      const FrameRecord& f = dataset.frames[frame_indices[group.indices[t]]];
      labels[static_cast<std::size_t>(t)] =
          binarize_intensity(f.intensities[au.index()], threshold) ? 1 : 0;
    }

    // Maximal activation runs, extended by pad and clamped to the video.
    std::vector<Interval> active;
    for (int t = 0; t < n;) {
      if (!labels[static_cast<std::size_t>(t)]) {
        ++t;
        continue;
      }
      int e = t;
      while (e + 1 < n && labels[static_cast<std::size_t>(e + 1)]) ++e;
      active.push_back({std::max(0, t - pad), std::min(n - 1, e + pad)});
      t = e + 1;
    }
    // Merge overlaps introduced by the padding.
    std::vector<Interval> merged;
    for (const Interval& iv : active) {
      if (!merged.empty() && iv.begin <= merged.back().end) {
        merged.back().end = std::max(merged.back().end, iv.end);
      } else {
        merged.push_back(iv);
      }
    }

    // The stretches between padded runs are the inactive sequences; those at
    // or beyond inactive_min frames are dropped as training material.
    std::vector<Interval> kept;
    int cursor = 0;
    for (const Interval& iv : merged) {
      if (iv.begin > cursor) {
        const Interval gap{cursor, iv.begin - 1};
        if (gap.length() < inactive_min) kept.push_back(gap);
      }
      kept.push_back(iv);
      cursor = iv.end + 1;
    }
    if (cursor < n) {
      const Interval gap{cursor, n - 1};
      if (gap.length() < inactive_min) kept.push_back(gap);
    }

    for (const Interval& iv : kept) {
      batch.sequences.push_back(make_sequence(dataset, frame_indices, group, iv, labels));
    }
  }
  return batch;
}

SequenceBatch full_test_sequence(const Dataset& dataset,
                                 std::span<const std::size_t> frame_indices, AuId au,
                                 int threshold) {
  SequenceBatch batch{au, {}};
  for (const SubjectGroup& group :
       group_contiguous(dataset, frame_indices, "full_test_sequence")) {
    const int n = static_cast<int>(group.indices.size());
    std::vector<std::uint8_t> labels(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t) {
      const FrameRecord& f = dataset.frames[frame_indices[group.indices[t]]];
      labels[static_cast<std::size_t>(t)] =
          binarize_intensity(f.intensities[au.index()], threshold) ? 1 : 0;
    }
    batch.sequences.push_back(
        make_sequence(dataset, frame_indices, group, Interval{0, n - 1}, labels));
  }
  return batch;
}

}  // namespace aupipe
