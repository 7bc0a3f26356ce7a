#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "treeloc/detections.hpp"
#include "treeloc/geodesy.hpp"
#include "treeloc/metadata.hpp"

namespace treeloc {

/// Ground distance of a pixel from the image center, in the camera frame:
/// `d_x` along image-right, `d_y` along image-up (the drone's forward axis).
struct CameraGroundOffset {
  double d_x = 0.0;
  double d_y = 0.0;
};

/// Average tree height per class, used for the summit-to-base correction.
struct GeolocationParams {
  double palm_height_m = 0.0;
  double other_tree_height_m = 0.0;

  double height_for(TreeClass c) const {
    return c == TreeClass::kPalm ? palm_height_m : other_tree_height_m;
  }
};

/// d_x = (x - x_c) / F_c * H,  d_y = (y_c - y) / F_c * H,
/// with x_c = width/2 and y_c = height/2.
CameraGroundOffset pixel_to_offset(const PixelPoint& p, const ImageMeta& m);

/// Rotates camera-frame (right, forward) onto (east, north) for a heading
/// measured clockwise from north.
EnuOffset rotate_to_enu(const CameraGroundOffset& o, double yaw_deg);

/// Inverse of rotate_to_enu.
CameraGroundOffset rotate_to_camera(const EnuOffset& o, double yaw_deg);

/// Moves the ray-ground intersection of a tree summit back to the tree base:
/// result = o * (H - h) / H. Requires H > h >= 0.
EnuOffset height_correct(const EnuOffset& o, double altitude_m,
                         double tree_height_m);

/// Full chain: bbox center -> camera offset -> ENU -> height correction ->
/// WGS84, relative to the drone position.
GeoPoint geolocate(const Detection& det, const ImageMeta& m,
                   const GeolocationParams& params);

/// A detection tagged with its ground position.
struct GeolocatedDetection {
  std::size_t detection_index = 0;
  std::string image_id;
  TreeClass class_label = TreeClass::kPalm;
  double confidence = 0.0;
  GeoPoint position;

  friend bool operator==(const GeolocatedDetection&,
                         const GeolocatedDetection&) = default;
};

/// Geolocates every detection with confidence >= `confidence_threshold`.
/// Output is ordered by detection index. Detections are validated against
/// the manifest first; orphans are an error.
std::vector<GeolocatedDetection> geolocate_all(
    std::span<const Detection> detections, std::span<const ImageMeta> manifest,
    const GeolocationParams& params, double confidence_threshold = 0.0);

std::string write_geolocated_geojson(
    std::span<const GeolocatedDetection> points);
std::string write_geolocated_csv(std::span<const GeolocatedDetection> points);

/// Reads either output format back (GeoJSON if the content starts with '{').
std::vector<GeolocatedDetection> parse_geolocated(std::string_view content);

}  // namespace treeloc
