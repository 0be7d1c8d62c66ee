#include "aupipe/synth.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>

#include "aupipe/rng.hpp"

namespace aupipe {

namespace {

// RNG stream tags.
constexpr std::uint64_t kDirectionStream = 11;
constexpr std::uint64_t kActivationStream = 12;
constexpr std::uint64_t kFeatureStream = 13;
constexpr std::uint64_t kLandmarkStream = 14;

// Geometric run length with the given mean, at least 1.
std::size_t geometric_length(Rng& rng, double mean) {
  const double p = 1.0 / std::max(1.0, mean);
  const double u = rng.uniform01();
  return 1 + static_cast<std::size_t>(std::log1p(-u) / std::log1p(-p));
}

// A plausible 68-point face in a 512 x 512 frame, iBUG ordering. Only the
// relative geometry matters: every region's landmark subset must span a
// non-degenerate box.
std::vector<Point2> face_template() {
  std::vector<Point2> pts(kLandmarkCount);
  const double cx = 256.0, cy = 256.0;
  // Jaw 0-16: arc from ear to ear through the chin.
  for (int i = 0; i <= 16; ++i) {
    const double t = static_cast<double>(i) / 16.0;
    const double angle = std::numbers::pi * (1.0 - t);
    pts[i] = {cx + 105.0 * std::cos(angle), cy - 10.0 + 125.0 * std::sin(angle)};
  }
  // Brows 17-21 and 22-26.
  for (int i = 0; i < 5; ++i) {
    const double t = static_cast<double>(i) / 4.0;
    pts[17 + i] = {cx - 85.0 + 60.0 * t, cy - 72.0 - 12.0 * std::sin(std::numbers::pi * t)};
    pts[22 + i] = {cx + 25.0 + 60.0 * t, cy - 72.0 - 12.0 * std::sin(std::numbers::pi * t)};
  }
  // Nose bridge 27-30 and base 31-35.
  for (int i = 0; i < 4; ++i) pts[27 + i] = {cx, cy - 48.0 + 18.0 * i};
  for (int i = 0; i < 5; ++i) pts[31 + i] = {cx - 18.0 + 9.0 * i, cy + 14.0};
  // Eyes 36-41 (left) and 42-47 (right): six points on an ellipse.
  for (int i = 0; i < 6; ++i) {
    const double angle = 2.0 * std::numbers::pi * i / 6.0;
    pts[36 + i] = {cx - 52.0 + 20.0 * std::cos(angle), cy - 44.0 + 9.0 * std::sin(angle)};
    pts[42 + i] = {cx + 52.0 + 20.0 * std::cos(angle), cy - 44.0 + 9.0 * std::sin(angle)};
  }
  // Mouth: outer ring 48-59, inner ring 60-67.
  for (int i = 0; i < 12; ++i) {
    const double angle = 2.0 * std::numbers::pi * i / 12.0;
    pts[48 + i] = {cx + 34.0 * std::cos(angle), cy + 66.0 + 15.0 * std::sin(angle)};
  }
  for (int i = 0; i < 8; ++i) {
    const double angle = 2.0 * std::numbers::pi * i / 8.0;
    pts[60 + i] = {cx + 20.0 * std::cos(angle), cy + 66.0 + 8.0 * std::sin(angle)};
  }
  return pts;
}

}  // namespace

std::string synthetic_subject_id(std::size_t s) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "s%02zu", s + 1);
  return buf;
}

Dataset generate_synthetic(const SyntheticSpec& spec) {
  if (spec.n_subjects == 0 || spec.frames_per_subject == 0 || spec.feature_dim == 0) {
    throw ValidationError("synthetic spec: sizes must be positive");
  }
  if (spec.class_separation < 0.0) {
    throw ValidationError("synthetic spec: separation must be >= 0");
  }

  // One unit direction per AU; AU a's occurrence shifts features along it.
  std::vector<std::vector<double>> directions(kAuCount);
  for (std::size_t a = 0; a < kAuCount; ++a) {
    Rng rng(mix_seed(spec.seed, kDirectionStream, a));
    std::vector<double>& dir = directions[a];
    dir.resize(spec.feature_dim);
    double norm_sq = 0.0;
    for (double& v : dir) {
      v = rng.normal();
      norm_sq += v * v;
    }
    const double norm = std::sqrt(norm_sq);
    for (double& v : dir) v /= norm;
  }

  const std::vector<Point2> base_face = face_template();

  Dataset dataset;
  dataset.feature_dim = spec.feature_dim;
  dataset.frames.reserve(spec.n_subjects * spec.frames_per_subject);
  for (std::size_t s = 0; s < spec.n_subjects; ++s) {
    const std::string subject = synthetic_subject_id(s);

    // Alternate inactive/active runs per AU.
    std::vector<std::vector<std::uint8_t>> active(kAuCount);
    std::vector<std::vector<int>> intensity(kAuCount);
    for (std::size_t a = 0; a < kAuCount; ++a) {
      Rng rng(mix_seed(spec.seed, kActivationStream, s * kAuCount + a));
      std::vector<std::uint8_t>& act = active[a];
      std::vector<int>& level = intensity[a];
      act.resize(spec.frames_per_subject, 0);
      level.resize(spec.frames_per_subject, 0);
      std::size_t t = 0;
      bool on = false;
      while (t < spec.frames_per_subject) {
        const std::size_t len =
            geometric_length(rng, on ? spec.mean_active_run : spec.mean_inactive_run);
        const std::size_t end = std::min(spec.frames_per_subject, t + len);
        for (; t < end; ++t) {
          act[t] = on ? 1 : 0;
          if (on) {
            level[t] = 2 + static_cast<int>(rng.below(4));  // 2..5
          } else {
            level[t] = rng.uniform01() < 0.1 ? 1 : 0;  // sub-threshold flicker
          }
        }
        on = !on;
      }
    }

    Rng feature_rng(mix_seed(spec.seed, kFeatureStream, s));
    Rng landmark_rng(mix_seed(spec.seed, kLandmarkStream, s));
    const double face_scale = 0.9 + 0.2 * landmark_rng.uniform01();
    const double face_dx = 40.0 * (landmark_rng.uniform01() - 0.5);
    const double face_dy = 40.0 * (landmark_rng.uniform01() - 0.5);

    for (std::size_t t = 0; t < spec.frames_per_subject; ++t) {
      FrameRecord frame;
      frame.subject = subject;
      frame.frame_index = static_cast<int>(t);
      frame.features.resize(spec.feature_dim);
      for (double& v : frame.features) v = feature_rng.normal();
      for (std::size_t a = 0; a < kAuCount; ++a) {
        frame.intensities[a] = intensity[a][t];
        if (active[a][t]) {
          for (std::size_t j = 0; j < spec.feature_dim; ++j) {
            frame.features[j] += spec.class_separation * directions[a][j];
          }
        }
      }
      if (spec.landmarks) {
        std::vector<Point2> pts(kLandmarkCount);
        for (std::size_t p = 0; p < kLandmarkCount; ++p) {
          pts[p].x = (base_face[p].x - 256.0) * face_scale + 256.0 + face_dx +
                     1.5 * landmark_rng.normal();
          pts[p].y = (base_face[p].y - 256.0) * face_scale + 256.0 + face_dy +
                     1.5 * landmark_rng.normal();
        }
        frame.landmarks = std::move(pts);
      }
      dataset.frames.push_back(std::move(frame));
    }
  }
  return dataset;
}

SyntheticFiles write_synthetic(const SyntheticSpec& spec, const std::string& out_dir) {
  const Dataset dataset = generate_synthetic(spec);
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(out_dir) / "features");

  SyntheticFiles files;
  for (std::size_t s = 0; s < spec.n_subjects; ++s) {
    const std::string subject = synthetic_subject_id(s);
    Matrix m(spec.frames_per_subject, spec.feature_dim);
    for (std::size_t t = 0; t < spec.frames_per_subject; ++t) {
      const FrameRecord& f = dataset.frames[s * spec.frames_per_subject + t];
      std::copy(f.features.begin(), f.features.end(), m.row(t));
    }
    const std::string path =
        (fs::path(out_dir) / "features" / (subject + "__" + spec.network + ".aufe")).string();
    write_features(path, m);
    files.feature_paths.push_back(path);
  }

  files.labels_path = (fs::path(out_dir) / "labels.csv").string();
  write_labels(files.labels_path, dataset.frames);

  if (spec.landmarks) {
    files.landmarks_path = (fs::path(out_dir) / "landmarks.csv").string();
    write_landmarks(files.landmarks_path, dataset);
  }

  files.split_path = (fs::path(out_dir) / "split.json").string();
  write_split_spec(files.split_path, default_split_spec(dataset.subjects()));
  return files;
}

}  // namespace aupipe
