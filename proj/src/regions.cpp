#include "aupipe/regions.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <map>

namespace aupipe {

namespace {

// iBUG 68-point index ranges (inclusive) per region.
struct IndexRange {
  std::size_t first, last;
};
constexpr IndexRange kUpperRange = {17, 47};             // brows + eyes
constexpr IndexRange kMiddleRange = {27, 35};            // nose
constexpr IndexRange kLowerMouth = {48, 67};
constexpr IndexRange kLowerJaw = {4, 12};

RegionBox bound_points(Region region, std::span<const Point2> landmarks,
                       std::initializer_list<IndexRange> ranges, double margin_fraction) {
  double x_min = std::numeric_limits<double>::infinity();
  double y_min = std::numeric_limits<double>::infinity();
  double x_max = -std::numeric_limits<double>::infinity();
  double y_max = -std::numeric_limits<double>::infinity();
  for (const IndexRange& range : ranges) {
    for (std::size_t i = range.first; i <= range.last; ++i) {
      x_min = std::min(x_min, landmarks[i].x);
      x_max = std::max(x_max, landmarks[i].x);
      y_min = std::min(y_min, landmarks[i].y);
      y_max = std::max(y_max, landmarks[i].y);
    }
  }
  const double width = x_max - x_min;
  const double height = y_max - y_min;
  if (width <= 0.0 || height <= 0.0) {
    throw DomainError(std::string("degenerate ") + region_name(region) +
                      " box: landmark subset has zero extent");
  }
  RegionBox box;
  box.region = region;
  box.x_min = std::max(0.0, x_min - margin_fraction * width);
  box.x_max = std::max(0.0, x_max + margin_fraction * width);
  box.y_min = std::max(0.0, y_min - margin_fraction * height);
  box.y_max = std::max(0.0, y_max + margin_fraction * height);
  return box;
}

}  // namespace

const char* region_name(Region region) {
  switch (region) {
    case Region::UpperHalf: return "upper";
    case Region::Middle: return "middle";
    case Region::LowerHalf: return "lower";
  }
  return "?";
}

Region region_for_au(AuId au) {
  switch (au.number()) {
    case 1:
    case 2:
    case 4:
    case 5:
    case 6: return Region::UpperHalf;
    case 9: return Region::Middle;
    default: return Region::LowerHalf;  // 12, 15, 17, 20, 25, 26
  }
}

std::array<RegionBox, 3> compute_region_boxes(std::span<const Point2> landmarks,
                                              double margin_fraction) {
  if (landmarks.size() != kLandmarkCount) {
    throw ShapeError("compute_region_boxes: expected 68 landmarks, got " +
                     std::to_string(landmarks.size()));
  }
  for (const Point2& p : landmarks) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw DomainError("compute_region_boxes: non-finite landmark coordinate");
    }
  }
  if (margin_fraction < 0.0) {
    throw DomainError("compute_region_boxes: negative margin_fraction");
  }
  return {bound_points(Region::UpperHalf, landmarks, {kUpperRange}, margin_fraction),
          bound_points(Region::Middle, landmarks, {kMiddleRange}, margin_fraction),
          bound_points(Region::LowerHalf, landmarks, {kLowerMouth, kLowerJaw}, margin_fraction)};
}

CropManifestResult emit_crop_manifest(const Dataset& dataset, std::span<const AuId> au_list,
                                      const std::string& out_path, double margin_fraction) {
  // subject -> frame -> dataset row, which is exactly the output order.
  std::map<std::string, std::map<int, std::size_t>> ordered;
  for (std::size_t i = 0; i < dataset.frames.size(); ++i) {
    ordered[dataset.frames[i].subject][dataset.frames[i].frame_index] = i;
  }
  std::vector<AuId> aus(au_list.begin(), au_list.end());
  std::sort(aus.begin(), aus.end());

  std::ofstream out(out_path, std::ios::trunc);
  if (!out) throw IoError("cannot write crop manifest: " + out_path);
  out << "subject,frame,au,region,x_min,y_min,x_max,y_max\n";

  CropManifestResult result;
  char buf[160];
  for (const auto& [subject, frames] : ordered) {
    for (const auto& [frame, row] : frames) {
      const FrameRecord& f = dataset.frames[row];
      if (!f.landmarks) {
        result.missing.push_back(subject + ":" + std::to_string(frame));
        continue;
      }
      const std::array<RegionBox, 3> boxes = compute_region_boxes(*f.landmarks, margin_fraction);
      for (AuId au : aus) {
        const RegionBox& box = boxes[static_cast<std::size_t>(region_for_au(au))];
        std::snprintf(buf, sizeof(buf), "%s,%d,%d,%s,%.6f,%.6f,%.6f,%.6f\n", subject.c_str(),
                      frame, au.number(), region_name(box.region), box.x_min, box.y_min,
                      box.x_max, box.y_max);
        out << buf;
        ++result.rows_written;
      }
    }
  }
  if (!out) throw IoError("failed writing crop manifest: " + out_path);
  return result;
}

}  // namespace aupipe
