#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "treeloc/geodesy.hpp"

namespace treeloc {

/// Pose and camera parameters of one nadir drone photo.
///
/// `altitude_m` is height above ground (DJI RelativeAltitude), `yaw_deg` is
/// flight yaw clockwise from true north, and `focal_px` is the calibrated
/// focal length in pixel units. The principal point is the image center.
struct ImageMeta {
  std::string image_id;
  double latitude = 0.0;
  double longitude = 0.0;
  double altitude_m = 0.0;
  double yaw_deg = 0.0;
  double focal_px = 0.0;
  int width_px = 0;
  int height_px = 0;
  std::optional<double> gimbal_pitch_deg;

  GeoPoint position() const { return {latitude, longitude}; }

  friend bool operator==(const ImageMeta&, const ImageMeta&) = default;
};

enum class ManifestFormat { kCsv, kJson };

inline constexpr double kDefaultNadirToleranceDeg = 5.0;

/// Maps any finite angle onto [-180, 180]; -180 maps to +180.
double normalize_yaw(double raw_deg);

/// focal_px = focal_mm / sensor_width_mm * width_px.
double focal_mm_to_px(double focal_mm, double sensor_width_mm, int width_px);

/// Normalizes yaw in place, then checks every ImageMeta invariant.
/// `record` names the entry in error messages.
void validate_image_meta(ImageMeta& meta, double nadir_tolerance_deg,
                         const std::string& record);

std::vector<ImageMeta> parse_manifest(
    std::string_view content, ManifestFormat format,
    double nadir_tolerance_deg = kDefaultNadirToleranceDeg);

/// Picks the format from the file extension (".json" means JSON).
ManifestFormat manifest_format_for(std::string_view path);

std::string write_manifest_csv(const std::vector<ImageMeta>& images);
std::string write_manifest_json(const std::vector<ImageMeta>& images);

}  // namespace treeloc
