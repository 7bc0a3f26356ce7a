#include "treeloc/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <nlohmann/json.hpp>

#include "treeloc/error.hpp"
#include "treeloc/projection.hpp"
#include "treeloc/rng.hpp"
#include "treeloc/text.hpp"

namespace treeloc::sim {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// Fixed sub-seed ids; one stream per noise channel so toggling a channel
// leaves the draws of every other channel untouched.
enum Channel : std::uint64_t {
  kLayout = 1,
  kGps = 2,
  kYaw = 3,
  kAltitude = 4,
  kPixel = 5,
  kMiss = 6,
  kFalsePositive = 7,
  kConfidence = 8,
};

struct Frame {
  EnuOffset center;  // relative to orchard origin
  double yaw_deg;
};

void require(bool ok, const std::string& what) {
  if (!ok) fail(ErrorKind::kConfig, "scenario: " + what);
}

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

double max_tree_height(const OrchardSpec& o) {
  double h = o.palm_height.mean_m + o.palm_height.spread_m;
  if (o.other_tree_fraction > 0.0) {
    h = std::max(h, o.other_tree_height.mean_m + o.other_tree_height.spread_m);
  }
  return h;
}

std::vector<Frame> plan_flight(const Scenario& s,
                               const std::vector<EnuOffset>& trees) {
  std::vector<Frame> frames;
  if (trees.empty()) return frames;
  const auto& f = s.flight;
  const auto& cam = s.camera;
  const double psi = deg_to_rad(f.yaw_deg);
  const double fwd_e = std::sin(psi), fwd_n = std::cos(psi);
  const double right_e = std::cos(psi), right_n = -std::sin(psi);

  double r_min = INFINITY, r_max = -INFINITY, a_min = INFINITY, a_max = -INFINITY;
  for (const auto& t : trees) {
    const double r = t.east_m * right_e + t.north_m * right_n;
    const double a = t.east_m * fwd_e + t.north_m * fwd_n;
    r_min = std::min(r_min, r);
    r_max = std::max(r_max, r);
    a_min = std::min(a_min, a);
    a_max = std::max(a_max, a);
  }

  const double across = f.altitude_m * cam.width_px / cam.focal_px;
  const double along = f.altitude_m * cam.height_px / cam.focal_px;
  const double line_step = across * (1.0 - f.side_overlap_frac);
  const double trigger_step = along * (1.0 - f.forward_overlap_frac);
  const int n_lines = 1 + static_cast<int>(std::ceil((r_max - r_min) / line_step));
  const int n_shots = 1 + static_cast<int>(std::ceil((a_max - a_min) / trigger_step));
  const double r0 = (r_min + r_max) / 2.0 - (n_lines - 1) * line_step / 2.0;
  const double a0 = (a_min + a_max) / 2.0 - (n_shots - 1) * trigger_step / 2.0;

  for (int line = 0; line < n_lines; ++line) {
    const bool reversed = f.alternate_lines && (line % 2 == 1);
    const double yaw = normalize_yaw(f.yaw_deg + (reversed ? 180.0 : 0.0));
    const double r = r0 + line * line_step;
    for (int k = 0; k < n_shots; ++k) {
      const int shot = reversed ? n_shots - 1 - k : k;
      const double a = a0 + shot * trigger_step;
      frames.push_back(
          {{r * right_e + a * fwd_e, r * right_n + a * fwd_n}, yaw});
    }
  }
  return frames;
}

std::string frame_id(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "IMG_%04zu", i + 1);
  return buf;
}

bool box_fits(double cx, double cy, double half, const CameraSpec& cam) {
  return cx - half >= 0.0 && cy - half >= 0.0 && cx + half <= cam.width_px &&
         cy + half <= cam.height_px;
}

}  // namespace

CameraSpec camera_preset(CameraPreset preset) {
  switch (preset) {
    case CameraPreset::kMavicPro:
      // 1/2.3" sensor, 6.17 mm wide, 4.73 mm lens, 4000x3000.
      return {focal_mm_to_px(4.73, 6.17, 4000), 4000, 3000, 300.0};
    case CameraPreset::kPhantom4Pro:
      // 1" sensor, 13.2 mm wide, 8.8 mm lens, 5472x3648.
      return {focal_mm_to_px(8.8, 13.2, 5472), 5472, 3648, 300.0};
  }
  return {};
}

void validate_scenario(const Scenario& s) {
  const auto& o = s.orchard;
  const auto& f = s.flight;
  const auto& c = s.camera;
  const auto& n = s.noise;
  require(o.rows >= 0 && o.cols >= 0, "rows and cols must be >= 0");
  require(std::isfinite(o.spacing_m) && o.spacing_m > 0.0, "spacing_m must be > 0");
  require(finite_nonneg(o.jitter_frac) && o.jitter_frac <= 1.0,
          "jitter_frac must be in [0, 1]");
  validate_geo_point(o.origin);
  for (const auto* h : {&o.palm_height, &o.other_tree_height}) {
    require(finite_nonneg(h->mean_m) && finite_nonneg(h->spread_m) &&
                h->spread_m <= h->mean_m,
            "tree heights need 0 <= spread_m <= mean_m");
  }
  require(finite_nonneg(o.other_tree_fraction) && o.other_tree_fraction <= 1.0,
          "other_tree_fraction must be in [0, 1]");
  require(std::isfinite(f.altitude_m) && f.altitude_m > 0.0, "altitude_m must be > 0");
  require(f.altitude_m > max_tree_height(o),
          "tree taller than flight altitude (" + text::format_number(max_tree_height(o)) +
              " m >= " + text::format_number(f.altitude_m) + " m)");
  require(finite_nonneg(f.forward_overlap_frac) && f.forward_overlap_frac < 1.0,
          "forward_overlap_frac must be in [0, 1)");
  require(finite_nonneg(f.side_overlap_frac) && f.side_overlap_frac < 1.0,
          "side_overlap_frac must be in [0, 1)");
  require(std::isfinite(f.yaw_deg), "yaw_deg must be finite");
  require(std::isfinite(c.focal_px) && c.focal_px > 0.0, "focal_px must be > 0");
  require(c.width_px > 0 && c.height_px > 0, "image dimensions must be > 0");
  require(std::isfinite(c.bbox_px) && c.bbox_px > 0.0 &&
              c.bbox_px < std::min(c.width_px, c.height_px),
          "bbox_px must be positive and smaller than the image");
  require(finite_nonneg(n.gps_sigma_m) && finite_nonneg(n.yaw_sigma_deg) &&
              finite_nonneg(n.alt_sigma_m) && finite_nonneg(n.pixel_sigma_px),
          "noise sigmas must be >= 0");
  require(finite_nonneg(n.miss_rate) && n.miss_rate <= 1.0,
          "miss_rate must be in [0, 1]");
  require(finite_nonneg(n.false_positive_rate) && n.false_positive_rate <= 1.0,
          "false_positive_rate must be in [0, 1]");
}

SimResult generate(const Scenario& s) {
  validate_scenario(s);
  const auto& orchard = s.orchard;
  const auto& cam = s.camera;
  const auto& noise = s.noise;
  const double altitude = s.flight.altitude_m;

  SimResult out;

  // Orchard layout. Draw count per tree is fixed (jitter x2, class, height).
  Rng layout = Rng::for_channel(s.seed, kLayout);
  const double jitter = orchard.jitter_frac * orchard.spacing_m / 2.0;
  std::vector<EnuOffset> tree_enu;
  for (int row = 0; row < orchard.rows; ++row) {
    for (int col = 0; col < orchard.cols; ++col) {
      const double je = layout.uniform(-jitter, jitter);
      const double jn = layout.uniform(-jitter, jitter);
      const bool other = layout.uniform() < orchard.other_tree_fraction;
      const double u = layout.uniform(-1.0, 1.0);
      const auto& hd = other ? orchard.other_tree_height : orchard.palm_height;
      const EnuOffset enu{col * orchard.spacing_m + je, row * orchard.spacing_m + jn};
      tree_enu.push_back(enu);
      out.ground_truth.push_back(
          {out.ground_truth.size(),
           other ? TreeClass::kOtherTree : TreeClass::kPalm,
           geo_apply(orchard.origin, enu), hd.mean_m + u * hd.spread_m});
    }
  }

  Rng gps = Rng::for_channel(s.seed, kGps);
  Rng yaw_rng = Rng::for_channel(s.seed, kYaw);
  Rng alt_rng = Rng::for_channel(s.seed, kAltitude);
  Rng pixel = Rng::for_channel(s.seed, kPixel);
  Rng miss = Rng::for_channel(s.seed, kMiss);
  Rng fp = Rng::for_channel(s.seed, kFalsePositive);
  Rng conf = Rng::for_channel(s.seed, kConfidence);

  const double half = cam.bbox_px / 2.0;
  const auto frames = plan_flight(s, tree_enu);
  for (std::size_t fi = 0; fi < frames.size(); ++fi) {
    const Frame& frame = frames[fi];
    ImageMeta truth;
    truth.image_id = frame_id(fi);
    const GeoPoint drone = geo_apply(orchard.origin, frame.center);
    truth.latitude = drone.latitude;
    truth.longitude = drone.longitude;
    truth.altitude_m = altitude;
    truth.yaw_deg = frame.yaw_deg;
    truth.focal_px = cam.focal_px;
    truth.width_px = cam.width_px;
    truth.height_px = cam.height_px;
    truth.gimbal_pitch_deg = -90.0;

    ImageMeta measured = truth;
    const EnuOffset gps_err{gps.normal(noise.gps_sigma_m),
                            gps.normal(noise.gps_sigma_m)};
    const GeoPoint reported = geo_apply(drone, gps_err);
    measured.latitude = reported.latitude;
    measured.longitude = reported.longitude;
    measured.yaw_deg = normalize_yaw(truth.yaw_deg + yaw_rng.normal(noise.yaw_sigma_deg));
    measured.altitude_m = truth.altitude_m + alt_rng.normal(noise.alt_sigma_m);
    if (!(measured.altitude_m > max_tree_height(orchard))) {
      fail(ErrorKind::kConfig,
           "scenario: altitude noise put frame " + truth.image_id + " below the tree tops");
    }

    std::size_t fp_trials = 0;
    for (const auto& tree : out.ground_truth) {
      // Fixed draw count per (frame, tree) pair regardless of visibility.
      const double px_noise = pixel.normal(noise.pixel_sigma_px);
      const double py_noise = pixel.normal(noise.pixel_sigma_px);
      const bool missed = miss.bernoulli(noise.miss_rate);
      const double confidence = conf.uniform(0.6, 1.0);

      const EnuOffset base = geo_offset(drone, tree.base);
      const double lift = altitude / (altitude - tree.height_m);
      const EnuOffset summit{base.east_m * lift, base.north_m * lift};
      const CameraGroundOffset c = rotate_to_camera(summit, truth.yaw_deg);
      const double x = cam.width_px / 2.0 + c.d_x * cam.focal_px / altitude;
      const double y = cam.height_px / 2.0 - c.d_y * cam.focal_px / altitude;
      if (box_fits(x, y, half, cam)) ++fp_trials;

      const double nx = x + px_noise;
      const double ny = y + py_noise;
      if (missed || !box_fits(nx, ny, half, cam)) continue;
      out.detections.push_back({truth.image_id, nx - half, ny - half, nx + half,
                                ny + half, tree.class_label, confidence});
      out.provenance.push_back(tree.tree_id);
    }

    for (std::size_t k = 0; k < fp_trials; ++k) {
      const bool spawn = fp.bernoulli(noise.false_positive_rate);
      const double x = fp.uniform(half, cam.width_px - half);
      const double y = fp.uniform(half, cam.height_px - half);
      const auto cls = fp.uniform() < 0.5 ? TreeClass::kPalm : TreeClass::kOtherTree;
      const double confidence = fp.uniform(0.3, 0.8);
      if (!spawn) continue;
      out.detections.push_back(
          {truth.image_id, x - half, y - half, x + half, y + half, cls, confidence});
      out.provenance.push_back(std::nullopt);
    }

    out.true_poses.push_back(std::move(truth));
    out.manifest.push_back(std::move(measured));
  }
  return out;
}

void emit(const SimResult& result, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    fail(ErrorKind::kIo, "cannot create directory " + dir.string() + ": " + ec.message());
  }
  text::write_file(dir / "manifest.csv", write_manifest_csv(result.manifest));
  text::write_file(dir / "detections.json", write_detections_json(result.detections));
  text::write_file(dir / "ground_truth.csv", write_ground_truth_csv(result.ground_truth));
  text::write_file(dir / "provenance.csv", write_provenance_csv(result.provenance));
}

std::string write_ground_truth_csv(const std::vector<GroundTruthTree>& trees) {
  std::string out = "tree_id,class_label,latitude,longitude,height_m\n";
  for (const auto& t : trees) {
    out += std::to_string(t.tree_id) + ',' + std::string(to_string(t.class_label)) +
           ',' + text::format_number(t.base.latitude) + ',' +
           text::format_number(t.base.longitude) + ',' +
           text::format_number(t.height_m) + '\n';
  }
  return out;
}

std::vector<GroundTruthTree> parse_ground_truth_csv(std::string_view content) {
  const auto rows = text::parse_csv(content);
  std::vector<GroundTruthTree> out;
  if (rows.empty()) fail(ErrorKind::kParse, "ground truth CSV has no header row");
  if (rows[0].fields.size() != 5 || rows[0].fields[0] != "tree_id") {
    fail(ErrorKind::kParse, "ground truth CSV: unexpected header");
  }
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& f = rows[r].fields;
    const std::string rec = "line " + std::to_string(rows[r].line);
    if (f.size() != 5) fail(ErrorKind::kParse, rec + ": expected 5 fields");
    double id = 0, lat = 0, lon = 0, h = 0;
    if (!text::parse_number(f[0], id) || id < 0 || id != std::floor(id) ||
        !text::parse_number(f[2], lat) || !text::parse_number(f[3], lon) ||
        !text::parse_number(f[4], h)) {
      fail(ErrorKind::kField, rec + ": malformed numeric field");
    }
    const auto cls = parse_tree_class(f[1]);
    if (!cls) fail(ErrorKind::kValidation, rec + ": unknown class_label '" + f[1] + "'");
    GroundTruthTree t{static_cast<std::size_t>(id), *cls, {lat, lon}, h};
    validate_geo_point(t.base);
    out.push_back(t);
  }
  return out;
}

std::string write_provenance_csv(const std::vector<Provenance>& provenance) {
  std::string out = "detection_index,tree_id\n";
  for (std::size_t i = 0; i < provenance.size(); ++i) {
    out += std::to_string(i) + ',' +
           (provenance[i] ? std::to_string(*provenance[i]) : "FALSE_POSITIVE") + '\n';
  }
  return out;
}

std::vector<Provenance> parse_provenance_csv(std::string_view content) {
  const auto rows = text::parse_csv(content);
  std::vector<Provenance> out;
  if (rows.empty()) fail(ErrorKind::kParse, "provenance CSV has no header row");
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& f = rows[r].fields;
    const std::string rec = "line " + std::to_string(rows[r].line);
    double idx = 0, id = 0;
    if (f.size() != 2 || !text::parse_number(f[0], idx) || idx != out.size()) {
      fail(ErrorKind::kParse, rec + ": expected sequential detection_index");
    }
    if (f[1] == "FALSE_POSITIVE") {
      out.emplace_back(std::nullopt);
    } else if (text::parse_number(f[1], id) && id >= 0 && id == std::floor(id)) {
      out.emplace_back(static_cast<std::size_t>(id));
    } else {
      fail(ErrorKind::kField, rec + ": malformed tree_id");
    }
  }
  return out;
}

// Scenario JSON ------------------------------------------------------------

namespace {

void reject_unknown(const json& obj, std::initializer_list<const char*> keys,
                    const std::string& where) {
  if (!obj.is_object()) fail(ErrorKind::kConfig, "scenario: '" + where + "' must be an object");
  for (const auto& [k, v] : obj.items()) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; })) {
      fail(ErrorKind::kConfig, "scenario: unknown key '" + where + "." + k + "'");
    }
  }
}

template <typename T>
void read(const json& obj, const char* key, T& dst, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    dst = it->get<T>();
  } catch (const json::exception&) {
    fail(ErrorKind::kConfig, "scenario: '" + where + "." + key + "' has the wrong type");
  }
}

void read_height(const json& obj, const char* key, HeightDistribution& h,
                 const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) return;
  const std::string path = where + "." + key;
  reject_unknown(*it, {"mean_m", "spread_m"}, path);
  read(*it, "mean_m", h.mean_m, path);
  read(*it, "spread_m", h.spread_m, path);
}

}  // namespace

Scenario parse_scenario_json(std::string_view content) {
  json doc;
  try {
    doc = json::parse(content);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::kConfig, std::string("scenario JSON: ") + e.what());
  }
  reject_unknown(doc, {"seed", "orchard", "flight", "camera", "noise"}, "$");
  Scenario s;
  read(doc, "seed", s.seed, "$");
  if (const auto it = doc.find("orchard"); it != doc.end()) {
    reject_unknown(*it, {"rows", "cols", "spacing_m", "jitter_frac", "origin",
                         "palm_height", "other_tree_height", "other_tree_fraction"},
                   "orchard");
    auto& o = s.orchard;
    read(*it, "rows", o.rows, "orchard");
    read(*it, "cols", o.cols, "orchard");
    read(*it, "spacing_m", o.spacing_m, "orchard");
    read(*it, "jitter_frac", o.jitter_frac, "orchard");
    read(*it, "other_tree_fraction", o.other_tree_fraction, "orchard");
    if (const auto og = it->find("origin"); og != it->end()) {
      reject_unknown(*og, {"latitude", "longitude"}, "orchard.origin");
      read(*og, "latitude", o.origin.latitude, "orchard.origin");
      read(*og, "longitude", o.origin.longitude, "orchard.origin");
    }
    read_height(*it, "palm_height", o.palm_height, "orchard");
    read_height(*it, "other_tree_height", o.other_tree_height, "orchard");
  }
  if (const auto it = doc.find("flight"); it != doc.end()) {
    reject_unknown(*it, {"altitude_m", "forward_overlap_frac", "side_overlap_frac",
                         "yaw_deg", "alternate_lines"},
                   "flight");
    auto& f = s.flight;
    read(*it, "altitude_m", f.altitude_m, "flight");
    read(*it, "forward_overlap_frac", f.forward_overlap_frac, "flight");
    read(*it, "side_overlap_frac", f.side_overlap_frac, "flight");
    read(*it, "yaw_deg", f.yaw_deg, "flight");
    read(*it, "alternate_lines", f.alternate_lines, "flight");
  }
  if (const auto it = doc.find("camera"); it != doc.end()) {
    reject_unknown(*it, {"preset", "focal_px", "width_px", "height_px", "bbox_px"},
                   "camera");
    if (const auto p = it->find("preset"); p != it->end()) {
      const auto name = p->is_string() ? p->get<std::string>() : std::string();
      if (name == "mavic_pro") {
        s.camera = camera_preset(CameraPreset::kMavicPro);
      } else if (name == "phantom4_pro") {
        s.camera = camera_preset(CameraPreset::kPhantom4Pro);
      } else {
        fail(ErrorKind::kConfig, "scenario: unknown camera preset '" + name + "'");
      }
    }
    read(*it, "focal_px", s.camera.focal_px, "camera");
    read(*it, "width_px", s.camera.width_px, "camera");
    read(*it, "height_px", s.camera.height_px, "camera");
    read(*it, "bbox_px", s.camera.bbox_px, "camera");
  }
  if (const auto it = doc.find("noise"); it != doc.end()) {
    reject_unknown(*it, {"gps_sigma_m", "yaw_sigma_deg", "alt_sigma_m",
                         "pixel_sigma_px", "miss_rate", "false_positive_rate"},
                   "noise");
    auto& n = s.noise;
    read(*it, "gps_sigma_m", n.gps_sigma_m, "noise");
    read(*it, "yaw_sigma_deg", n.yaw_sigma_deg, "noise");
    read(*it, "alt_sigma_m", n.alt_sigma_m, "noise");
    read(*it, "pixel_sigma_px", n.pixel_sigma_px, "noise");
    read(*it, "miss_rate", n.miss_rate, "noise");
    read(*it, "false_positive_rate", n.false_positive_rate, "noise");
  }
  validate_scenario(s);
  return s;
}

std::string write_scenario_json(const Scenario& s) {
  const auto height = [](const HeightDistribution& h) {
    return ordered_json{{"mean_m", h.mean_m}, {"spread_m", h.spread_m}};
  };
  ordered_json doc;
  doc["seed"] = s.seed;
  doc["orchard"] = {
      {"rows", s.orchard.rows},
      {"cols", s.orchard.cols},
      {"spacing_m", s.orchard.spacing_m},
      {"jitter_frac", s.orchard.jitter_frac},
      {"origin", {{"latitude", s.orchard.origin.latitude},
                  {"longitude", s.orchard.origin.longitude}}},
      {"palm_height", height(s.orchard.palm_height)},
      {"other_tree_height", height(s.orchard.other_tree_height)},
      {"other_tree_fraction", s.orchard.other_tree_fraction}};
  doc["flight"] = {{"altitude_m", s.flight.altitude_m},
                   {"forward_overlap_frac", s.flight.forward_overlap_frac},
                   {"side_overlap_frac", s.flight.side_overlap_frac},
                   {"yaw_deg", s.flight.yaw_deg},
                   {"alternate_lines", s.flight.alternate_lines}};
  doc["camera"] = {{"focal_px", s.camera.focal_px},
                   {"width_px", s.camera.width_px},
                   {"height_px", s.camera.height_px},
                   {"bbox_px", s.camera.bbox_px}};
  doc["noise"] = {{"gps_sigma_m", s.noise.gps_sigma_m},
                  {"yaw_sigma_deg", s.noise.yaw_sigma_deg},
                  {"alt_sigma_m", s.noise.alt_sigma_m},
                  {"pixel_sigma_px", s.noise.pixel_sigma_px},
                  {"miss_rate", s.noise.miss_rate},
                  {"false_positive_rate", s.noise.false_positive_rate}};
  return doc.dump(2) + "\n";
}

}  // namespace treeloc::sim
