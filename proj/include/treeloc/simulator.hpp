#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "treeloc/detections.hpp"
#include "treeloc/geodesy.hpp"
#include "treeloc/metadata.hpp"

namespace treeloc::sim {

struct HeightDistribution {
  double mean_m = 6.0;
  double spread_m = 0.0;  // heights are uniform in [mean - spread, mean + spread]
};

struct OrchardSpec {
  int rows = 10;
  int cols = 10;
  double spacing_m = 8.0;
  /// Per-axis jitter is uniform in +/- jitter_frac * spacing_m / 2.
  double jitter_frac = 0.0;
  /// Grid node (row 0, col 0); rows run north, columns run east.
  GeoPoint origin{24.1, 47.3};
  HeightDistribution palm_height{6.0, 0.0};
  HeightDistribution other_tree_height{4.0, 0.0};
  double other_tree_fraction = 0.0;
};

struct FlightSpec {
  double altitude_m = 60.0;
  double forward_overlap_frac = 0.75;
  double side_overlap_frac = 0.6;
  /// Heading of the first line; lines alternate by 180 deg when
  /// `alternate_lines` is set (lawnmower pattern).
  double yaw_deg = 0.0;
  bool alternate_lines = true;
};

struct CameraSpec {
  double focal_px = 3600.0;
  int width_px = 4000;
  int height_px = 3000;
  /// Side of the square box drawn around each projected summit.
  double bbox_px = 300.0;
};

struct NoiseSpec {
  double gps_sigma_m = 0.0;   // per horizontal axis
  double yaw_sigma_deg = 0.0;
  double alt_sigma_m = 0.0;
  double pixel_sigma_px = 0.0;  // per image axis
  double miss_rate = 0.0;
  /// Chance of one spurious box per tree whose noise-free box fits a frame.
  double false_positive_rate = 0.0;
};

struct Scenario {
  std::uint64_t seed = 0;
  OrchardSpec orchard;
  FlightSpec flight;
  CameraSpec camera;
  NoiseSpec noise;
};

/// Camera constants for common airframes. Typical published values, not
/// measured calibrations.
enum class CameraPreset { kMavicPro, kPhantom4Pro };
CameraSpec camera_preset(CameraPreset preset);

struct GroundTruthTree {
  std::size_t tree_id = 0;
  TreeClass class_label = TreeClass::kPalm;
  GeoPoint base;
  double height_m = 0.0;

  friend bool operator==(const GroundTruthTree&, const GroundTruthTree&) = default;
};

/// Provenance of one emitted detection: a tree id, or nullopt for a false
/// positive.
using Provenance = std::optional<std::size_t>;

struct SimResult {
  std::vector<ImageMeta> manifest;
  std::vector<Detection> detections;
  std::vector<GroundTruthTree> ground_truth;
  std::vector<Provenance> provenance;  // parallel to detections
  /// Frames as actually flown, before metadata noise.
  std::vector<ImageMeta> true_poses;
};

/// Throws kConfig describing the first violated scenario invariant.
void validate_scenario(const Scenario& s);

/// Deterministic for a given scenario. Detections are ordered by frame, then
/// by tree id, with a frame's false positives last.
SimResult generate(const Scenario& s);

/// Writes manifest.csv, detections.json, ground_truth.csv and
/// provenance.csv into `dir` (created if missing).
void emit(const SimResult& result, const std::filesystem::path& dir);

Scenario parse_scenario_json(std::string_view content);
std::string write_scenario_json(const Scenario& s);

std::string write_ground_truth_csv(const std::vector<GroundTruthTree>& trees);
std::vector<GroundTruthTree> parse_ground_truth_csv(std::string_view content);

std::string write_provenance_csv(const std::vector<Provenance>& provenance);
std::vector<Provenance> parse_provenance_csv(std::string_view content);

}  // namespace treeloc::sim
