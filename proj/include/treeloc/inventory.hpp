#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "treeloc/detections.hpp"
#include "treeloc/geodesy.hpp"
#include "treeloc/projection.hpp"

namespace treeloc {

inline constexpr double kDefaultMergeRadiusM = 4.0;

/// Input to clustering: one geolocated detection. `image_id` is optional;
/// when empty the point carries no same-image constraint.
struct ClusterPoint {
  GeoPoint position;
  TreeClass class_label = TreeClass::kPalm;
  double confidence = 0.0;
  std::size_t index = 0;
  std::string image_id;
};

inline constexpr std::size_t kNoGroup = static_cast<std::size_t>(-1);

/// Planar variant used by the geographic front end and by tests. `group`
/// identifies the source image (kNoGroup when unknown).
struct PlanarPoint {
  double east_m = 0.0;
  double north_m = 0.0;
  TreeClass class_label = TreeClass::kPalm;
  std::size_t index = 0;
  std::size_t group = kNoGroup;
};

/// How overlapping-image detections are merged into trees.
enum class DedupMethod {
  /// Plain connected components under the merge radius (`cluster`).
  kRadius,
  /// Image-exclusive linkage with per-image offset co-registration
  /// (`deduplicate`).
  kRegistered,
};

std::string_view to_string(DedupMethod m);
std::optional<DedupMethod> parse_dedup_method(std::string_view name);

/// One unique tree after merging overlapping-image detections.
struct TreeRecord {
  std::size_t tree_id = 0;
  TreeClass class_label = TreeClass::kPalm;
  GeoPoint position;
  std::size_t support = 0;
  double mean_confidence = 0.0;
  std::vector<std::size_t> member_indices;  // ascending

  friend bool operator==(const TreeRecord&, const TreeRecord&) = default;
};

struct InventoryReport {
  std::map<TreeClass, std::size_t> per_class;  // every class present, 0 if none
  std::size_t total_trees = 0;
  std::size_t detections_consumed = 0;
  double merge_radius_m = 0.0;
};

/// Connected components of the relation "same class and distance <=
/// radius", computed with union-find over a grid of cell size `radius`.
/// Each component lists the input indices (`PlanarPoint::index`) in
/// ascending order; components are sorted by their smallest index.
std::vector<std::vector<std::size_t>> cluster_planar(
    std::span<const PlanarPoint> points, double merge_radius_m);

/// Geographic clustering. Distances are measured in one tangent plane
/// centered on the centroid of all points. Positions are
/// confidence-weighted centroids; tree_ids follow smallest member index.
std::vector<TreeRecord> cluster(std::span<const ClusterPoint> points,
                                double merge_radius_m);

/// Single linkage that never joins two components holding detections from
/// the same image: same-class pairs within the radius are visited in
/// ascending distance (ties by index) and merged unless their image sets
/// intersect. Output format matches cluster_planar.
std::vector<std::vector<std::size_t>> link_image_exclusive(
    std::span<const PlanarPoint> points, double merge_radius_m);

struct RegistrationOptions {
  int max_iterations = 5;
};

/// Image-exclusive linkage, then repeated co-registration: every image is
/// shifted by the median offset between its detections and the centroids
/// of their other cluster members, and the shifted points are relinked,
/// until the partition stops changing. Shifts only steer the partition.
std::vector<std::vector<std::size_t>> deduplicate_planar(
    std::span<const PlanarPoint> points, double merge_radius_m,
    const RegistrationOptions& options = {});

/// Geographic front end of deduplicate_planar; records are built exactly as
/// in `cluster` (centroids of the original, unshifted positions).
std::vector<TreeRecord> deduplicate(std::span<const ClusterPoint> points,
                                    double merge_radius_m,
                                    const RegistrationOptions& options = {});

std::vector<TreeRecord> build_tree_records(std::span<const ClusterPoint> points,
                                           double merge_radius_m,
                                           DedupMethod method);

std::vector<ClusterPoint> to_cluster_points(
    std::span<const GeolocatedDetection> detections);

InventoryReport build_inventory(std::span<const TreeRecord> records,
                                double merge_radius_m);

std::string write_inventory_geojson(std::span<const TreeRecord> records);
std::string write_inventory_csv(std::span<const TreeRecord> records);
std::string write_inventory_report_json(const InventoryReport& report);

/// Reads inventory GeoJSON or CSV (GeoJSON if content starts with '{').
/// Member indices travel in GeoJSON only; CSV records come back without them.
std::vector<TreeRecord> parse_inventory(std::string_view content);

}  // namespace treeloc
