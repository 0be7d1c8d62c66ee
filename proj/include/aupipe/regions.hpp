#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "aupipe/core.hpp"
#include "aupipe/dataset.hpp"

namespace aupipe {

enum class Region { UpperHalf, Middle, LowerHalf };

const char* region_name(Region region);

/// AU -> face region routing: brows/eyes/cheek AUs to the upper half, the nose
/// wrinkler to the middle, mouth/chin/jaw AUs to the lower half.
Region region_for_au(AuId au);

struct RegionBox {
  Region region = Region::UpperHalf;
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;
};

/// Crop rectangles for the three regions from 68 landmarks (iBUG layout,
/// 0-based: jaw 0-16, brows 17-26, nose 27-35, eyes 36-47, mouth 48-67).
/// Each box bounds its landmark subset, is expanded on every side by
/// margin_fraction of its own width/height, then clamped to non-negative
/// coordinates. Upper: 17-47; middle: 27-35; lower: 48-67 plus jaw 4-12.
std::array<RegionBox, 3> compute_region_boxes(std::span<const Point2> landmarks,
                                              double margin_fraction = 0.1);

struct CropManifestResult {
  std::size_t rows_written = 0;
  /// Frames skipped for missing landmarks, as "subject:frame" strings.
  std::vector<std::string> missing;
};

/// Writes the crop manifest CSV (header subject,frame,au,region,x_min,y_min,
/// x_max,y_max), rows ordered by subject, frame, AU ascending. Frames without
/// landmarks are reported in the result instead of aborting the run.
CropManifestResult emit_crop_manifest(const Dataset& dataset, std::span<const AuId> au_list,
                                      const std::string& out_path,
                                      double margin_fraction = 0.1);

}  // namespace aupipe
