#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aupipe/core.hpp"
#include "aupipe/dataset.hpp"

namespace aupipe {

/// Desk-scale stand-in for the real corpus: seeded activation runs per AU,
/// class-conditional Gaussian features, template-based landmarks. Written in
/// the same file formats the loaders consume.
struct SyntheticSpec {
  std::size_t n_subjects = 27;
  std::size_t frames_per_subject = 500;
  std::size_t feature_dim = 64;
  double class_separation = 4.0;
  double mean_active_run = 8.0;     // geometric run-length means, in frames
  double mean_inactive_run = 40.0;
  bool landmarks = true;
  std::uint64_t seed = 1;
  std::string network = "synth";
};

struct SyntheticFiles {
  std::vector<std::string> feature_paths;  // one per subject
  std::string labels_path;
  std::string landmarks_path;  // empty when spec.landmarks is false
  std::string split_path;
};

/// Builds the dataset in memory. Feature vectors are standard Gaussian noise
/// plus, for every AU active in the frame, class_separation along that AU's
/// seeded unit direction. Intensities are 2..5 on active frames and 0..1
/// otherwise, so the occurrence threshold recovers the runs exactly.
Dataset generate_synthetic(const SyntheticSpec& spec);

/// Generates and writes feature/label/landmark/split files under out_dir.
/// Deterministic per seed, byte for byte.
SyntheticFiles write_synthetic(const SyntheticSpec& spec, const std::string& out_dir);

/// Subject id for row s, zero-padded ("s01", "s02", ...).
std::string synthetic_subject_id(std::size_t s);

}  // namespace aupipe
