#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "treeloc/config.hpp"
#include "treeloc/detections.hpp"
#include "treeloc/error.hpp"
#include "treeloc/eval.hpp"
#include "treeloc/geodesy.hpp"
#include "treeloc/inventory.hpp"
#include "treeloc/metadata.hpp"
#include "treeloc/projection.hpp"
#include "treeloc/simulator.hpp"

namespace py = pybind11;
using namespace treeloc;

namespace {

using LatLon = std::pair<double, double>;

PipelineConfig config_of(const std::string& json) {
  auto c = parse_config_json(json);
  validate_config(c);
  return c;
}

ManifestFormat manifest_format_of(const std::string& name) {
  if (name == "csv") return ManifestFormat::kCsv;
  if (name == "json") return ManifestFormat::kJson;
  fail(ErrorKind::kConfig, "manifest format must be 'csv' or 'json', got '" + name + "'");
}

bool csv_output(const std::string& name) {
  if (name == "csv") return true;
  if (name == "geojson") return false;
  fail(ErrorKind::kConfig, "output format must be 'geojson' or 'csv', got '" + name + "'");
}

py::dict simulate(const std::string& scenario_json) {
  const auto r = sim::generate(sim::parse_scenario_json(scenario_json));
  py::dict out;
  out["manifest_csv"] = write_manifest_csv(r.manifest);
  out["detections_json"] = write_detections_json(r.detections);
  out["ground_truth_csv"] = sim::write_ground_truth_csv(r.ground_truth);
  out["provenance_csv"] = sim::write_provenance_csv(r.provenance);
  return out;
}

std::string geolocate_text(const std::string& manifest, const std::string& detections,
                           const std::string& config_json, const std::string& manifest_format,
                           const std::string& output_format) {
  const auto cfg = config_of(config_json);
  const bool csv = csv_output(output_format);
  const auto meta =
      parse_manifest(manifest, manifest_format_of(manifest_format), cfg.nadir_tolerance_deg);
  const auto g = geolocate_all(parse_detections(detections), meta, cfg.geolocation_params(),
                               cfg.confidence_threshold);
  return csv ? write_geolocated_csv(g) : write_geolocated_geojson(g);
}

std::pair<std::string, std::string> inventory_text(const std::string& geolocated,
                                                   const std::string& config_json,
                                                   const std::string& output_format) {
  const auto cfg = config_of(config_json);
  const bool csv = csv_output(output_format);
  const auto points = to_cluster_points(parse_geolocated(geolocated));
  const auto records = build_tree_records(points, cfg.merge_radius_m, cfg.dedup_method);
  return {csv ? write_inventory_csv(records) : write_inventory_geojson(records),
          write_inventory_report_json(build_inventory(records, cfg.merge_radius_m))};
}

std::string evaluate_text(const std::string& inventory, const std::string& truth_csv,
                          const std::string& config_json) {
  const auto cfg = config_of(config_json);
  return write_eval_report_json(evaluate_inventory(
      parse_inventory(inventory), sim::parse_ground_truth_csv(truth_csv), cfg.match_radius_m));
}

LatLon geolocate_pixel(double latitude, double longitude, double altitude_m, double yaw_deg,
                       double focal_px, int width_px, int height_px, double x, double y,
                       double tree_height_m) {
  ImageMeta m;
  m.image_id = "frame";
  m.latitude = latitude;
  m.longitude = longitude;
  m.altitude_m = altitude_m;
  m.yaw_deg = yaw_deg;
  m.focal_px = focal_px;
  m.width_px = width_px;
  m.height_px = height_px;
  validate_image_meta(m, kDefaultNadirToleranceDeg, "frame");
  const auto enu = height_correct(rotate_to_enu(pixel_to_offset({x, y}, m), m.yaw_deg),
                                  m.altitude_m, tree_height_m);
  const auto p = geo_apply(m.position(), enu);
  return {p.latitude, p.longitude};
}

std::vector<std::vector<std::size_t>> cluster_points(
    const std::vector<std::tuple<double, double, std::string>>& points, double radius_m) {
  std::vector<PlanarPoint> planar;
  planar.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& [east, north, label] = points[i];
    const auto cls = parse_tree_class(label);
    if (!cls) fail(ErrorKind::kValidation, "unknown class_label '" + label + "'");
    planar.push_back({east, north, *cls, i});
  }
  if (!(radius_m > 0.0)) fail(ErrorKind::kValidation, "merge radius must be > 0");
  return cluster_planar(planar, radius_m);
}

py::dict stats_of(const std::vector<double>& distances) {
  const auto s = error_stats(distances);
  py::dict out;
  out["mean_m"] = s.mean_m;
  out["max_m"] = s.max_m;
  out["std_m"] = s.std_m;
  out["n"] = s.n;
  return out;
}

}  // namespace

PYBIND11_MODULE(_treeloc, m) {
  m.doc() = "Tree geolocation and counting from nadir drone imagery";

  static py::exception<Error> treeloc_error(m, "TreelocError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::kIo) {
        PyErr_SetString(PyExc_OSError, e.what());
      } else {
        py::set_error(treeloc_error, e.what());
      }
    }
  });

  m.def("geo_offset",
        [](LatLon origin, LatLon target) {
          const auto o = geo_offset({origin.first, origin.second}, {target.first, target.second});
          return std::pair{o.east_m, o.north_m};
        },
        py::arg("origin"), py::arg("target"),
        "East and north meters from origin to target, both (lat, lon) degrees.");
  m.def("geo_apply",
        [](LatLon origin, std::pair<double, double> offset) {
          const auto p = geo_apply({origin.first, origin.second}, {offset.first, offset.second});
          return LatLon{p.latitude, p.longitude};
        },
        py::arg("origin"), py::arg("offset"),
        "Point reached from origin (lat, lon) by an (east, north) offset in meters.");
  m.def("geolocate_pixel", &geolocate_pixel, py::arg("latitude"), py::arg("longitude"),
        py::arg("altitude_m"), py::arg("yaw_deg"), py::arg("focal_px"), py::arg("width_px"),
        py::arg("height_px"), py::arg("x"), py::arg("y"), py::arg("tree_height_m") = 0.0,
        "Ground (lat, lon) of the tree base under pixel (x, y) of a nadir frame.");
  m.def("cluster", &cluster_points, py::arg("points"), py::arg("radius_m"),
        "Connected components of (east, north, class_label) points under a merge radius.");
  m.def("error_stats", &stats_of, py::arg("distances_m"),
        "Mean, max and population standard deviation of distances.");
  m.def("simulate", &simulate, py::arg("scenario_json") = "{}",
        "Synthetic survey; returns the four emitted files as strings.");
  m.def("geolocate", &geolocate_text, py::arg("manifest"), py::arg("detections"),
        py::arg("config_json") = "{}", py::arg("manifest_format") = "csv",
        py::arg("output_format") = "geojson");
  m.def("inventory", &inventory_text, py::arg("geolocated"), py::arg("config_json") = "{}",
        py::arg("output_format") = "geojson",
        "Returns (inventory, report_json) for geolocated detections.");
  m.def("evaluate", &evaluate_text, py::arg("inventory"), py::arg("truth_csv"),
        py::arg("config_json") = "{}");
}
