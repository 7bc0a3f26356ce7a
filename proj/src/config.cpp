#include "treeloc/config.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

#include "treeloc/error.hpp"

namespace treeloc {

void validate_config(const PipelineConfig& c) {
  auto bad = [](const std::string& what) { fail(ErrorKind::kConfig, "config: " + what); };
  const auto nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
  if (!nonneg(c.avg_palm_height_m)) bad("avg_palm_height_m must be >= 0");
  if (!nonneg(c.avg_other_tree_height_m)) bad("avg_other_tree_height_m must be >= 0");
  if (!nonneg(c.merge_radius_m) || c.merge_radius_m == 0.0) bad("merge_radius_m must be > 0");
  if (!nonneg(c.match_radius_m) || c.match_radius_m == 0.0) bad("match_radius_m must be > 0");
  if (!nonneg(c.confidence_threshold) || c.confidence_threshold > 1.0) {
    bad("confidence_threshold must be in [0, 1]");
  }
  if (!nonneg(c.nadir_tolerance_deg)) bad("nadir_tolerance_deg must be >= 0");
}

PipelineConfig parse_config_json(std::string_view content) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(content);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::kConfig, std::string("config JSON: ") + e.what());
  }
  if (!doc.is_object()) fail(ErrorKind::kConfig, "config JSON must be an object");

  PipelineConfig c;
  const std::pair<const char*, double*> fields[] = {
      {"avg_palm_height_m", &c.avg_palm_height_m},
      {"avg_other_tree_height_m", &c.avg_other_tree_height_m},
      {"merge_radius_m", &c.merge_radius_m},
      {"confidence_threshold", &c.confidence_threshold},
      {"match_radius_m", &c.match_radius_m},
      {"nadir_tolerance_deg", &c.nadir_tolerance_deg},
  };
  for (const auto& [key, value] : doc.items()) {
    if (key == "dedup_method") {
      const auto m = value.is_string() ? parse_dedup_method(value.get<std::string>())
                                       : std::nullopt;
      if (!m) fail(ErrorKind::kConfig, "config: dedup_method must be \"radius\" or \"registered\"");
      c.dedup_method = *m;
      continue;
    }
    double* dst = nullptr;
    for (const auto& [name, ptr] : fields) {
      if (key == name) dst = ptr;
    }
    if (!dst) fail(ErrorKind::kConfig, "config: unknown key '" + key + "'");
    if (!value.is_number()) fail(ErrorKind::kConfig, "config: '" + key + "' must be a number");
    *dst = value.get<double>();
  }
  validate_config(c);
  return c;
}

std::string write_config_json(const PipelineConfig& c) {
  nlohmann::ordered_json doc;
  doc["avg_palm_height_m"] = c.avg_palm_height_m;
  doc["avg_other_tree_height_m"] = c.avg_other_tree_height_m;
  doc["merge_radius_m"] = c.merge_radius_m;
  doc["confidence_threshold"] = c.confidence_threshold;
  doc["match_radius_m"] = c.match_radius_m;
  doc["nadir_tolerance_deg"] = c.nadir_tolerance_deg;
  doc["dedup_method"] = std::string(to_string(c.dedup_method));
  return doc.dump(2) + "\n";
}

}  // namespace treeloc
