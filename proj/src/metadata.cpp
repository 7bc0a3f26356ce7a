#include "treeloc/metadata.hpp"

#include <cmath>
#include <nlohmann/json.hpp>
#include <unordered_set>

#include "treeloc/error.hpp"
#include "treeloc/text.hpp"

namespace treeloc {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr const char* kCsvHeader[] = {
    "image_id", "latitude",  "longitude", "altitude_m",      "yaw_deg",
    "focal_px", "width_px", "height_px", "gimbal_pitch_deg"};
constexpr std::size_t kRequiredColumns = 8;

double require_number(const std::string& field, std::string_view raw,
                      const std::string& record) {
  double v = 0.0;
  if (!text::parse_number(raw, v)) {
    fail(ErrorKind::kField, record + ": field '" + field +
                                "' is not a number: '" + std::string(raw) + "'");
  }
  return v;
}

int require_positive_int(const std::string& field, double v,
                         const std::string& record) {
  if (!std::isfinite(v) || v != std::floor(v) || v <= 0.0 || v > 1e9) {
    fail(ErrorKind::kValidation,
         record + ": " + field + " must be a positive integer");
  }
  return static_cast<int>(v);
}

std::string record_name(std::size_t index, const std::string& id) {
  std::string out = "record " + std::to_string(index);
  if (!id.empty()) out += " ('" + id + "')";
  return out;
}

void check_unique(const std::vector<ImageMeta>& images) {
  std::unordered_set<std::string> seen;
  for (const auto& m : images) {
    if (!seen.insert(m.image_id).second) {
      fail(ErrorKind::kValidation, "duplicate image_id '" + m.image_id + "'");
    }
  }
}

std::vector<ImageMeta> parse_csv_manifest(std::string_view content,
                                          double tol) {
  const auto rows = text::parse_csv(content);
  if (rows.empty()) fail(ErrorKind::kParse, "manifest CSV has no header row");
  const auto& header = rows.front().fields;
  std::vector<int> column(std::size(kCsvHeader), -1);
  for (std::size_t c = 0; c < header.size(); ++c) {
    for (std::size_t k = 0; k < std::size(kCsvHeader); ++k) {
      if (header[c] == kCsvHeader[k]) column[k] = static_cast<int>(c);
    }
  }
  for (std::size_t k = 0; k < kRequiredColumns; ++k) {
    if (column[k] < 0) {
      fail(ErrorKind::kField,
           std::string("manifest CSV header lacks required field '") +
               kCsvHeader[k] + "'");
    }
  }

  std::vector<ImageMeta> out;
  out.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::string where = "line " + std::to_string(row.line);
    if (row.fields.size() != header.size()) {
      fail(ErrorKind::kParse, where + ": expected " +
                                  std::to_string(header.size()) +
                                  " fields, found " +
                                  std::to_string(row.fields.size()));
    }
    auto cell = [&](std::size_t k) -> const std::string& {
      return row.fields[static_cast<std::size_t>(column[k])];
    };
    ImageMeta m;
    m.image_id = cell(0);
    const std::string rec = where + " " + record_name(r - 1, m.image_id);
    for (std::size_t k = 1; k < kRequiredColumns; ++k) {
      if (cell(k).empty()) {
        fail(ErrorKind::kField,
             rec + ": missing required field '" + kCsvHeader[k] + "'");
      }
    }
    if (m.image_id.empty()) {
      fail(ErrorKind::kField, rec + ": missing required field 'image_id'");
    }
    m.latitude = require_number("latitude", cell(1), rec);
    m.longitude = require_number("longitude", cell(2), rec);
    m.altitude_m = require_number("altitude_m", cell(3), rec);
    m.yaw_deg = require_number("yaw_deg", cell(4), rec);
    m.focal_px = require_number("focal_px", cell(5), rec);
    m.width_px = require_positive_int(
        "width_px", require_number("width_px", cell(6), rec), rec);
    m.height_px = require_positive_int(
        "height_px", require_number("height_px", cell(7), rec), rec);
    if (column[8] >= 0 && !cell(8).empty()) {
      m.gimbal_pitch_deg = require_number("gimbal_pitch_deg", cell(8), rec);
    }
    validate_image_meta(m, tol, rec);
    out.push_back(std::move(m));
  }
  return out;
}

double json_number(const json& obj, const char* field,
                   const std::string& rec) {
  const auto it = obj.find(field);
  if (it == obj.end() || it->is_null()) {
    fail(ErrorKind::kField,
         rec + ": missing required field '" + field + "'");
  }
  if (!it->is_number()) {
    fail(ErrorKind::kField, rec + ": field '" + field + "' must be a number");
  }
  return it->get<double>();
}

std::vector<ImageMeta> parse_json_manifest(std::string_view content,
                                           double tol) {
  json doc;
  try {
    doc = json::parse(content);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::kParse, std::string("manifest JSON: ") + e.what());
  }
  if (!doc.is_array()) {
    fail(ErrorKind::kParse, "manifest JSON must be an array of objects");
  }
  std::vector<ImageMeta> out;
  out.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& obj = doc[i];
    if (!obj.is_object()) {
      fail(ErrorKind::kParse,
           "record " + std::to_string(i) + ": expected a JSON object");
    }
    ImageMeta m;
    const auto id = obj.find("image_id");
    if (id == obj.end() || !id->is_string() || id->get<std::string>().empty()) {
      fail(ErrorKind::kField, record_name(i, "") +
                                  ": missing required field 'image_id'");
    }
    m.image_id = id->get<std::string>();
    const std::string rec = record_name(i, m.image_id);
    m.latitude = json_number(obj, "latitude", rec);
    m.longitude = json_number(obj, "longitude", rec);
    m.altitude_m = json_number(obj, "altitude_m", rec);
    m.yaw_deg = json_number(obj, "yaw_deg", rec);
    m.focal_px = json_number(obj, "focal_px", rec);
    m.width_px =
        require_positive_int("width_px", json_number(obj, "width_px", rec), rec);
    m.height_px = require_positive_int(
        "height_px", json_number(obj, "height_px", rec), rec);
    const auto pitch = obj.find("gimbal_pitch_deg");
    if (pitch != obj.end() && !pitch->is_null()) {
      m.gimbal_pitch_deg = json_number(obj, "gimbal_pitch_deg", rec);
    }
    validate_image_meta(m, tol, rec);
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace

double normalize_yaw(double raw_deg) {
  if (!std::isfinite(raw_deg)) {
    fail(ErrorKind::kValidation, "yaw must be finite");
  }
  double r = std::fmod(raw_deg, 360.0);  // exact, in (-360, 360)
  if (r > 180.0) r -= 360.0;
  if (r <= -180.0) r += 360.0;
  return r;
}

double focal_mm_to_px(double focal_mm, double sensor_width_mm, int width_px) {
  if (!(focal_mm > 0.0) || !(sensor_width_mm > 0.0) || width_px <= 0) {
    fail(ErrorKind::kValidation,
         "focal length, sensor width and image width must be positive");
  }
  return focal_mm / sensor_width_mm * width_px;
}

void validate_image_meta(ImageMeta& m, double nadir_tolerance_deg,
                         const std::string& record) {
  auto bad = [&](const std::string& what) {
    fail(ErrorKind::kValidation, record + ": " + what);
  };
  if (m.image_id.empty()) bad("image_id must be non-empty");
  if (!std::isfinite(m.latitude) || m.latitude < -90.0 || m.latitude > 90.0) {
    bad("latitude must be in [-90, 90]");
  }
  if (!std::isfinite(m.longitude) || m.longitude < -180.0 ||
      m.longitude > 180.0) {
    bad("longitude must be in [-180, 180]");
  }
  if (!std::isfinite(m.altitude_m) || !(m.altitude_m > 0.0)) {
    bad("altitude_m must be > 0");
  }
  if (!std::isfinite(m.focal_px) || !(m.focal_px > 0.0)) {
    bad("focal_px must be > 0");
  }
  if (m.width_px <= 0) bad("width_px must be > 0");
  if (m.height_px <= 0) bad("height_px must be > 0");
  if (!std::isfinite(m.yaw_deg)) bad("yaw_deg must be finite");
  m.yaw_deg = normalize_yaw(m.yaw_deg);
  if (m.gimbal_pitch_deg) {
    const double pitch = *m.gimbal_pitch_deg;
    if (!std::isfinite(pitch) ||
        std::abs(pitch + 90.0) > nadir_tolerance_deg) {
      bad("gimbal_pitch_deg " + text::format_number(pitch) +
          " is not within " + text::format_number(nadir_tolerance_deg) +
          " deg of nadir (-90)");
    }
  }
}

std::vector<ImageMeta> parse_manifest(std::string_view content,
                                      ManifestFormat format,
                                      double nadir_tolerance_deg) {
  auto out = format == ManifestFormat::kCsv
                 ? parse_csv_manifest(content, nadir_tolerance_deg)
                 : parse_json_manifest(content, nadir_tolerance_deg);
  check_unique(out);
  return out;
}

ManifestFormat manifest_format_for(std::string_view path) {
  const auto ends_with = [&](std::string_view suffix) {
    return path.size() >= suffix.size() &&
           path.substr(path.size() - suffix.size()) == suffix;
  };
  return ends_with(".json") || ends_with(".JSON") ? ManifestFormat::kJson
                                                  : ManifestFormat::kCsv;
}

std::string write_manifest_csv(const std::vector<ImageMeta>& images) {
  std::string out;
  for (std::size_t k = 0; k < std::size(kCsvHeader); ++k) {
    if (k) out += ',';
    out += kCsvHeader[k];
  }
  out += '\n';
  for (const auto& m : images) {
    out += text::csv_escape(m.image_id);
    for (const double v : {m.latitude, m.longitude, m.altitude_m, m.yaw_deg,
                           m.focal_px}) {
      out += ',';
      out += text::format_number(v);
    }
    out += ',' + std::to_string(m.width_px);
    out += ',' + std::to_string(m.height_px);
    out += ',';
    if (m.gimbal_pitch_deg) out += text::format_number(*m.gimbal_pitch_deg);
    out += '\n';
  }
  return out;
}

std::string write_manifest_json(const std::vector<ImageMeta>& images) {
  ordered_json doc = ordered_json::array();
  for (const auto& m : images) {
    ordered_json o;
    o["image_id"] = m.image_id;
    o["latitude"] = m.latitude;
    o["longitude"] = m.longitude;
    o["altitude_m"] = m.altitude_m;
    o["yaw_deg"] = m.yaw_deg;
    o["focal_px"] = m.focal_px;
    o["width_px"] = m.width_px;
    o["height_px"] = m.height_px;
    if (m.gimbal_pitch_deg) o["gimbal_pitch_deg"] = *m.gimbal_pitch_deg;
    doc.push_back(std::move(o));
  }
  return doc.dump(2) + "\n";
}

}  // namespace treeloc
