#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "treeloc/metadata.hpp"

namespace treeloc {

enum class TreeClass { kPalm, kOtherTree };

inline constexpr TreeClass kAllTreeClasses[] = {TreeClass::kPalm,
                                                TreeClass::kOtherTree};

/// "palm" / "other_tree".
std::string_view to_string(TreeClass c);
std::optional<TreeClass> parse_tree_class(std::string_view label);

/// Pixel in image coordinates: origin top-left, x right, y down.
struct PixelPoint {
  double x = 0.0;
  double y = 0.0;
};

/// One detector output box. Coordinates are pixels in the referenced image.
struct Detection {
  std::string image_id;
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;
  TreeClass class_label = TreeClass::kPalm;
  double confidence = 0.0;

  friend bool operator==(const Detection&, const Detection&) = default;
};

PixelPoint bbox_center(const Detection& d);

/// Checks box ordering, non-negativity and confidence range.
void validate_detection(const Detection& d, const std::string& record);

/// Additionally checks the box against the dimensions of its image.
void validate_detection_bounds(const Detection& d, const ImageMeta& image,
                               const std::string& record);

/// Accepts a JSON array of objects or JSON lines (one object per line).
std::vector<Detection> parse_detections(std::string_view content);

/// Every detection must reference an image in the manifest and fit in it.
void validate_against_manifest(const std::vector<Detection>& detections,
                               const std::vector<ImageMeta>& manifest);

std::string write_detections_json(const std::vector<Detection>& detections);

}  // namespace treeloc
