#include "treeloc/detections.hpp"

#include <cmath>
#include <nlohmann/json.hpp>
#include <unordered_map>

#include "treeloc/error.hpp"
#include "treeloc/text.hpp"

namespace treeloc {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string rec_name(std::size_t i) { return "record " + std::to_string(i); }

Detection detection_from_json(const json& obj, const std::string& rec) {
  if (!obj.is_object()) fail(ErrorKind::kParse, rec + ": expected a JSON object");
  Detection d;
  const auto id = obj.find("image_id");
  if (id == obj.end() || !id->is_string()) {
    fail(ErrorKind::kField, rec + ": missing required field 'image_id'");
  }
  d.image_id = id->get<std::string>();

  const auto bbox = obj.find("bbox");
  if (bbox == obj.end()) {
    fail(ErrorKind::kField, rec + ": missing required field 'bbox'");
  }
  if (!bbox->is_array() || bbox->size() != 4) {
    fail(ErrorKind::kField, rec + ": 'bbox' must be [x_min,y_min,x_max,y_max]");
  }
  for (const auto& v : *bbox) {
    if (!v.is_number()) {
      fail(ErrorKind::kField, rec + ": 'bbox' entries must be numbers");
    }
  }
  d.x_min = (*bbox)[0].get<double>();
  d.y_min = (*bbox)[1].get<double>();
  d.x_max = (*bbox)[2].get<double>();
  d.y_max = (*bbox)[3].get<double>();

  const auto label = obj.find("class_label");
  if (label == obj.end() || !label->is_string()) {
    fail(ErrorKind::kField, rec + ": missing required field 'class_label'");
  }
  const auto cls = parse_tree_class(label->get<std::string>());
  if (!cls) {
    fail(ErrorKind::kValidation, rec + ": unknown class_label '" +
                                     label->get<std::string>() + "'");
  }
  d.class_label = *cls;

  const auto conf = obj.find("confidence");
  if (conf == obj.end() || !conf->is_number()) {
    fail(ErrorKind::kField, rec + ": missing required field 'confidence'");
  }
  d.confidence = conf->get<double>();
  validate_detection(d, rec);
  return d;
}

}  // namespace

std::string_view to_string(TreeClass c) {
  return c == TreeClass::kPalm ? "palm" : "other_tree";
}

std::optional<TreeClass> parse_tree_class(std::string_view label) {
  if (label == "palm") return TreeClass::kPalm;
  if (label == "other_tree") return TreeClass::kOtherTree;
  return std::nullopt;
}

PixelPoint bbox_center(const Detection& d) {
  return {(d.x_min + d.x_max) / 2.0, (d.y_min + d.y_max) / 2.0};
}

void validate_detection(const Detection& d, const std::string& record) {
  auto bad = [&](const std::string& what) {
    fail(ErrorKind::kValidation, record + ": " + what);
  };
  for (const double v : {d.x_min, d.y_min, d.x_max, d.y_max}) {
    if (!std::isfinite(v)) bad("bbox coordinates must be finite");
  }
  if (d.image_id.empty()) bad("image_id must be non-empty");
  if (!(d.x_min < d.x_max)) bad("x_min < x_max violated");
  if (!(d.y_min < d.y_max)) bad("y_min < y_max violated");
  if (d.x_min < 0.0 || d.y_min < 0.0) bad("bbox must start at x, y >= 0");
  if (!std::isfinite(d.confidence) || d.confidence < 0.0 ||
      d.confidence > 1.0) {
    bad("confidence must be in [0, 1]");
  }
}

void validate_detection_bounds(const Detection& d, const ImageMeta& image,
                               const std::string& record) {
  if (d.x_max > image.width_px || d.y_max > image.height_px) {
    fail(ErrorKind::kValidation,
         record + ": bbox exceeds " + std::to_string(image.width_px) + "x" +
             std::to_string(image.height_px) + " bounds of image '" +
             image.image_id + "'");
  }
}

std::vector<Detection> parse_detections(std::string_view content) {
  std::vector<Detection> out;
  std::size_t first = content.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return out;  // empty file

  if (content[first] == '[') {
    json doc;
    try {
      doc = json::parse(content);
    } catch (const json::parse_error& e) {
      fail(ErrorKind::kParse, std::string("detections JSON: ") + e.what());
    }
    out.reserve(doc.size());
    for (std::size_t i = 0; i < doc.size(); ++i) {
      out.push_back(detection_from_json(doc[i], rec_name(i)));
    }
    return out;
  }

  // JSON lines
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= content.size()) {
    const std::size_t nl = content.find('\n', pos);
    const std::string_view line = content.substr(
        pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    ++line_no;
    if (line.find_first_not_of(" \t\r") != std::string_view::npos) {
      json obj;
      try {
        obj = json::parse(line);
      } catch (const json::parse_error& e) {
        fail(ErrorKind::kParse, "detections line " + std::to_string(line_no) +
                                    ": " + e.what());
      }
      out.push_back(detection_from_json(
          obj, rec_name(out.size()) + " (line " + std::to_string(line_no) + ")"));
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return out;
}

void validate_against_manifest(const std::vector<Detection>& detections,
                               const std::vector<ImageMeta>& manifest) {
  std::unordered_map<std::string_view, const ImageMeta*> by_id;
  for (const auto& m : manifest) by_id.emplace(m.image_id, &m);
  for (std::size_t i = 0; i < detections.size(); ++i) {
    const auto it = by_id.find(detections[i].image_id);
    if (it == by_id.end()) {
      fail(ErrorKind::kValidation,
           rec_name(i) + ": image_id '" + detections[i].image_id +
               "' is not in the manifest");
    }
    validate_detection_bounds(detections[i], *it->second, rec_name(i));
  }
}

std::string write_detections_json(const std::vector<Detection>& detections) {
  ordered_json doc = ordered_json::array();
  for (const auto& d : detections) {
    ordered_json o;
    o["image_id"] = d.image_id;
    o["bbox"] = {d.x_min, d.y_min, d.x_max, d.y_max};
    o["class_label"] = std::string(to_string(d.class_label));
    o["confidence"] = d.confidence;
    doc.push_back(std::move(o));
  }
  return doc.dump(2) + "\n";
}

}  // namespace treeloc
