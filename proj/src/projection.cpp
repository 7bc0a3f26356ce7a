#include "treeloc/projection.hpp"

#include <cmath>
#include <nlohmann/json.hpp>
#include <unordered_map>

#include "treeloc/error.hpp"
#include "treeloc/text.hpp"

namespace treeloc {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

struct SinCos {
  double sin;
  double cos;
};

// Reduces to [-45, 45] deg before calling the libm functions so that
// multiples of 90 deg come out exact.
SinCos sincos_deg(double deg) {
  double r = std::fmod(deg, 360.0);
  const double q = std::round(r / 90.0);
  r -= 90.0 * q;
  const double s = std::sin(deg_to_rad(r));
  const double c = std::cos(deg_to_rad(r));
  switch (static_cast<int>(q) & 3) {
    case 0: return {s, c};
    case 1: return {c, -s};
    case 2: return {-s, -c};
    default: return {-c, s};
  }
}

}  // namespace

CameraGroundOffset pixel_to_offset(const PixelPoint& p, const ImageMeta& m) {
  const double x_c = m.width_px / 2.0;
  const double y_c = m.height_px / 2.0;
  return {(p.x - x_c) / m.focal_px * m.altitude_m,
          (y_c - p.y) / m.focal_px * m.altitude_m};
}

EnuOffset rotate_to_enu(const CameraGroundOffset& o, double yaw_deg) {
  const auto [s, c] = sincos_deg(yaw_deg);
  return {o.d_x * c + o.d_y * s, -o.d_x * s + o.d_y * c};
}

CameraGroundOffset rotate_to_camera(const EnuOffset& o, double yaw_deg) {
  const auto [s, c] = sincos_deg(yaw_deg);
  return {o.east_m * c - o.north_m * s, o.east_m * s + o.north_m * c};
}

EnuOffset height_correct(const EnuOffset& o, double altitude_m,
                         double tree_height_m) {
  if (!(tree_height_m >= 0.0) || !std::isfinite(tree_height_m)) {
    fail(ErrorKind::kGeometry, "tree height must be finite and >= 0");
  }
  if (!(altitude_m > tree_height_m)) {
    fail(ErrorKind::kGeometry,
         "altitude " + text::format_number(altitude_m) +
             " m does not exceed tree height " +
             text::format_number(tree_height_m) + " m");
  }
  const double scale = (altitude_m - tree_height_m) / altitude_m;
  return {o.east_m * scale, o.north_m * scale};
}

GeoPoint geolocate(const Detection& det, const ImageMeta& m,
                   const GeolocationParams& params) {
  const auto camera = pixel_to_offset(bbox_center(det), m);
  const auto enu = rotate_to_enu(camera, m.yaw_deg);
  const auto base =
      height_correct(enu, m.altitude_m, params.height_for(det.class_label));
  return geo_apply(m.position(), base);
}

std::vector<GeolocatedDetection> geolocate_all(
    std::span<const Detection> detections, std::span<const ImageMeta> manifest,
    const GeolocationParams& params, double confidence_threshold) {
  std::unordered_map<std::string_view, const ImageMeta*> by_id;
  for (const auto& m : manifest) by_id.emplace(m.image_id, &m);

  std::vector<GeolocatedDetection> out;
  out.reserve(detections.size());
  for (std::size_t i = 0; i < detections.size(); ++i) {
    const Detection& d = detections[i];
    const std::string rec = "detection " + std::to_string(i);
    const auto it = by_id.find(d.image_id);
    if (it == by_id.end()) {
      fail(ErrorKind::kValidation,
           rec + ": image_id '" + d.image_id + "' is not in the manifest");
    }
    validate_detection(d, rec);
    validate_detection_bounds(d, *it->second, rec);
    if (d.confidence < confidence_threshold) continue;
    out.push_back({i, d.image_id, d.class_label, d.confidence,
                   geolocate(d, *it->second, params)});
  }
  return out;
}

std::string write_geolocated_geojson(
    std::span<const GeolocatedDetection> points) {
  ordered_json features = ordered_json::array();
  for (const auto& p : points) {
    ordered_json f;
    f["type"] = "Feature";
    f["geometry"] = {{"type", "Point"},
                     {"coordinates", {p.position.longitude, p.position.latitude}}};
    f["properties"] = {{"image_id", p.image_id},
                       {"class_label", std::string(to_string(p.class_label))},
                       {"confidence", p.confidence},
                       {"detection_index", p.detection_index}};
    features.push_back(std::move(f));
  }
  ordered_json doc;
  doc["type"] = "FeatureCollection";
  doc["features"] = std::move(features);
  return doc.dump(2) + "\n";
}

std::string write_geolocated_csv(std::span<const GeolocatedDetection> points) {
  std::string out =
      "detection_index,image_id,class_label,confidence,latitude,longitude\n";
  for (const auto& p : points) {
    out += std::to_string(p.detection_index) + ',' +
           text::csv_escape(p.image_id) + ',' +
           std::string(to_string(p.class_label)) + ',' +
           text::format_number(p.confidence) + ',' +
           text::format_number(p.position.latitude) + ',' +
           text::format_number(p.position.longitude) + '\n';
  }
  return out;
}

namespace {

std::vector<GeolocatedDetection> parse_geolocated_geojson(
    std::string_view content) {
  json doc;
  try {
    doc = json::parse(content);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::kParse, std::string("geolocated GeoJSON: ") + e.what());
  }
  const auto features = doc.find("features");
  if (!doc.is_object() || features == doc.end() || !features->is_array()) {
    fail(ErrorKind::kParse, "geolocated GeoJSON must be a FeatureCollection");
  }
  std::vector<GeolocatedDetection> out;
  for (std::size_t i = 0; i < features->size(); ++i) {
    const auto& f = (*features)[i];
    const std::string rec = "feature " + std::to_string(i);
    try {
      const auto& coords = f.at("geometry").at("coordinates");
      const auto& props = f.at("properties");
      GeolocatedDetection g;
      g.position = {coords.at(1).get<double>(), coords.at(0).get<double>()};
      g.image_id = props.at("image_id").get<std::string>();
      const auto cls = parse_tree_class(props.at("class_label").get<std::string>());
      if (!cls) fail(ErrorKind::kValidation, rec + ": unknown class_label");
      g.class_label = *cls;
      g.confidence = props.at("confidence").get<double>();
      g.detection_index = props.at("detection_index").get<std::size_t>();
      validate_geo_point(g.position);
      out.push_back(std::move(g));
    } catch (const json::exception& e) {
      fail(ErrorKind::kField, rec + ": " + e.what());
    }
  }
  return out;
}

std::vector<GeolocatedDetection> parse_geolocated_csv(std::string_view content) {
  const auto rows = text::parse_csv(content);
  std::vector<GeolocatedDetection> out;
  if (rows.empty()) return out;
  if (rows[0].fields.size() != 6 || rows[0].fields[0] != "detection_index") {
    fail(ErrorKind::kParse, "geolocated CSV: unexpected header");
  }
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& f = rows[r].fields;
    const std::string rec = "line " + std::to_string(rows[r].line);
    if (f.size() != 6) fail(ErrorKind::kParse, rec + ": expected 6 fields");
    GeolocatedDetection g;
    double idx = 0, conf = 0, lat = 0, lon = 0;
    if (!text::parse_number(f[0], idx) || idx < 0 || idx != std::floor(idx) ||
        !text::parse_number(f[3], conf) || !text::parse_number(f[4], lat) ||
        !text::parse_number(f[5], lon)) {
      fail(ErrorKind::kField, rec + ": malformed numeric field");
    }
    const auto cls = parse_tree_class(f[2]);
    if (!cls) fail(ErrorKind::kValidation, rec + ": unknown class_label");
    g.detection_index = static_cast<std::size_t>(idx);
    g.image_id = f[1];
    g.class_label = *cls;
    g.confidence = conf;
    g.position = {lat, lon};
    validate_geo_point(g.position);
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace

std::vector<GeolocatedDetection> parse_geolocated(std::string_view content) {
  const auto first = content.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  return content[first] == '{' ? parse_geolocated_geojson(content)
                               : parse_geolocated_csv(content);
}

}  // namespace treeloc
