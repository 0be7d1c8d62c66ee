#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aupipe/core.hpp"

namespace aupipe {

inline constexpr int kIntensityMin = 0;
inline constexpr int kIntensityMax = 5;
inline constexpr int kDefaultThreshold = 2;
inline constexpr std::size_t kLandmarkCount = 68;
inline constexpr std::uint32_t kFeatureFormatVersion = 1;

/// One video frame: subject, 0-based frame ordinal, optional feature vector,
/// the 12 AU intensities (indexed by AuId::index()), optional 68 landmarks.
struct FrameRecord {
  std::string subject;
  int frame_index = 0;
  std::vector<double> features;
  std::array<int, kAuCount> intensities{};
  std::optional<std::vector<Point2>> landmarks;
};

struct Dataset {
  std::vector<FrameRecord> frames;
  std::size_t feature_dim = 0;  // 0 until features are attached

  /// Subject ids in first-appearance order.
  std::vector<std::string> subjects() const;
};

struct SplitSpec {
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;
};

/// Frame indices into a Dataset, one list per split, dataset order preserved.
struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

struct StandardizationParams {
  std::vector<double> mean;
  std::vector<double> stddev;
};

/// One contiguous stretch of frames with per-frame binary labels.
struct LabeledSequence {
  std::string subject;
  int start_frame = 0;
  Matrix features;                   // T x D
  std::vector<std::uint8_t> labels;  // T, true binarized occurrence per frame
};

struct SequenceBatch {
  AuId au;
  std::vector<LabeledSequence> sequences;
};

// ---- file formats ----------------------------------------------------------

/// Binary feature file: magic "AUFE", version u32, rows u32, dim u32, then
/// row-major little-endian float32. One file per (subject, network) pair.
Matrix load_features(const std::string& path);
void write_features(const std::string& path, const Matrix& m);

/// Label CSV with header subject,frame,au1,...,au26; intensities 0..5.
/// Frame indices must be strictly increasing within each subject.
std::vector<FrameRecord> load_labels(const std::string& path);
void write_labels(const std::string& path, const std::vector<FrameRecord>& frames);

/// Landmark CSV with header subject,frame,x0,y0,...,x67,y67. Rows must match
/// frames already present in the dataset.
void load_landmarks(Dataset& dataset, const std::string& path);
void write_landmarks(const std::string& path, const Dataset& dataset);

SplitSpec load_split_spec(const std::string& path);
void write_split_spec(const std::string& path, const SplitSpec& spec);

/// Attaches a subject's feature matrix; row r maps to that subject's r-th frame.
void attach_features(Dataset& dataset, const std::string& subject, const Matrix& features);

// ---- operations -------------------------------------------------------------

/// Occurrence rule: present iff intensity >= threshold. Intensity outside 0..5
/// throws DomainError.
bool binarize_intensity(int intensity, int threshold = kDefaultThreshold);

long count_activations(const Dataset& dataset, AuId au, int threshold = kDefaultThreshold);

/// Default subject assignment: 12/6/9 for 27 subjects, proportional otherwise.
SplitSpec default_split_spec(const std::vector<std::string>& subjects);

/// Partitions frames by subject membership. The spec sets must be pairwise
/// disjoint, cover every loaded subject, and name only loaded subjects.
Split make_splits(const Dataset& dataset, const SplitSpec& spec);

/// Class balancing for one AU: keeps every positive frame and a seeded uniform
/// sample (without replacement) of equally many negatives. Returns positions
/// into `frame_indices`, ascending. When negatives do not outnumber positives
/// the whole collection is returned. Zero positives throws
/// InsufficientDataError.
std::vector<std::size_t> balance(const Dataset& dataset,
                                 std::span<const std::size_t> frame_indices, AuId au,
                                 int threshold, std::uint64_t seed);

/// Per-dimension mean and population (divide-by-N) standard deviation.
/// Zero-variance dimensions get stddev 1 so they standardize to a constant 0.
StandardizationParams fit_standardizer(const Matrix& train_features);

Matrix apply_standardizer(const StandardizationParams& params, const Matrix& features);
void apply_standardizer_inplace(const StandardizationParams& params, Matrix& features);
std::vector<double> apply_standardizer_row(const StandardizationParams& params,
                                           std::span<const double> row);

/// Segments each subject's timeline for recurrent training. Maximal runs of
/// positive frames are extended by `pad` frames on each side (clamped to the
/// video), overlapping extended runs are merged, and the leftover inactive
/// stretches become negative sequences unless their length reaches
/// inactive_min frames ([inactive_min, inactive_max] is the removal band and
/// longer runs are dropped too). Labels inside every sequence stay the true
/// binarized values. Frames must be contiguous per subject.
SequenceBatch build_sequences(const Dataset& dataset, std::span<const std::size_t> frame_indices,
                              AuId au, int threshold = kDefaultThreshold, int pad = 3,
                              int inactive_min = 500, int inactive_max = 1000);

/// One unfiltered sequence per subject spanning all of its frames.
SequenceBatch full_test_sequence(const Dataset& dataset,
                                 std::span<const std::size_t> frame_indices, AuId au,
                                 int threshold = kDefaultThreshold);

}  // namespace aupipe
