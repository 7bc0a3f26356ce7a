#include "treeloc/inventory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <nlohmann/json.hpp>
#include <map>
#include <numeric>
#include <tuple>
#include <unordered_map>

#include "treeloc/error.hpp"
#include "treeloc/text.hpp"

namespace treeloc {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), rank_(n, 0) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<unsigned char> rank_;
};

struct CellKey {
  std::int64_t cx;
  std::int64_t cy;
  int cls;
  bool operator==(const CellKey&) const = default;
};

struct CellKeyHash {
  std::size_t operator()(const CellKey& k) const noexcept {
    std::uint64_t h = static_cast<std::uint64_t>(k.cx) * 0x9E3779B97F4A7C15ULL;
    h ^= static_cast<std::uint64_t>(k.cy) + 0x632BE59BD9B4E019ULL + (h << 6) +
         (h >> 2);
    return static_cast<std::size_t>(h ^ static_cast<std::uint64_t>(k.cls));
  }
};

void check_radius(double r) {
  if (!std::isfinite(r) || !(r > 0.0)) {
    fail(ErrorKind::kConfig, "merge radius must be a positive finite number");
  }
}

template <typename Point>
void check_unique_indices(std::span<const Point> points) {
  std::vector<std::size_t> idx;
  idx.reserve(points.size());
  for (const auto& p : points) idx.push_back(p.index);
  std::sort(idx.begin(), idx.end());
  if (std::adjacent_find(idx.begin(), idx.end()) != idx.end()) {
    fail(ErrorKind::kValidation, "cluster input indices must be unique");
  }
}

struct CandidatePair {
  double d2;
  std::size_t lo;  // smaller PlanarPoint::index
  std::size_t hi;
  std::size_t a;  // positions in the input span
  std::size_t b;
};

// Same-class pairs within the radius, sorted by (distance, index pair).
std::vector<CandidatePair> candidate_pairs(std::span<const PlanarPoint> points,
                                           double r) {
  const double r2 = r * r;
  std::unordered_map<CellKey, std::vector<std::size_t>, CellKeyHash> grid;
  std::vector<CellKey> cell_of(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    if (!std::isfinite(p.east_m) || !std::isfinite(p.north_m)) {
      fail(ErrorKind::kValidation, "cluster input points must be finite");
    }
    cell_of[i] = {static_cast<std::int64_t>(std::floor(p.east_m / r)),
                  static_cast<std::int64_t>(std::floor(p.north_m / r)),
                  static_cast<int>(p.class_label)};
    grid[cell_of[i]].push_back(i);
  }
  std::vector<CandidatePair> pairs;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& c = cell_of[i];
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        const auto it = grid.find({c.cx + dx, c.cy + dy, c.cls});
        if (it == grid.end()) continue;
        for (const std::size_t j : it->second) {
          if (j <= i) continue;
          const double de = points[j].east_m - points[i].east_m;
          const double dn = points[j].north_m - points[i].north_m;
          const double d2 = de * de + dn * dn;
          if (d2 > r2) continue;
          const auto [lo, hi] = std::minmax(points[i].index, points[j].index);
          pairs.push_back({d2, lo, hi, i, j});
        }
      }
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const auto& x, const auto& y) {
    return std::tie(x.d2, x.lo, x.hi) < std::tie(y.d2, y.lo, y.hi);
  });
  return pairs;
}

std::vector<std::vector<std::size_t>> components_of(
    DisjointSets& sets, std::span<const PlanarPoint> points) {
  std::unordered_map<std::size_t, std::vector<std::size_t>> by_root;
  for (std::size_t i = 0; i < points.size(); ++i) {
    by_root[sets.find(i)].push_back(points[i].index);
  }
  std::vector<std::vector<std::size_t>> components;
  components.reserve(by_root.size());
  for (auto& [root, members] : by_root) {
    std::sort(members.begin(), members.end());
    components.push_back(std::move(members));
  }
  std::sort(components.begin(), components.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return components;
}

bool sorted_intersect(const std::vector<std::size_t>& a,
                      const std::vector<std::size_t>& b) {
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i == *j) return true;
    if (*i < *j) ++i; else ++j;
  }
  return false;
}

double median(std::vector<double>& v) {
  const std::size_t m = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m), v.end());
  if (v.size() % 2 == 1) return v[m];
  const double upper = v[m];
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m));
  return (lower + upper) / 2.0;
}

struct PreparedPoints {
  std::vector<ClusterPoint> sorted;  // by index
  std::vector<PlanarPoint> planar;   // parallel to sorted
  std::unordered_map<std::size_t, std::size_t> position_of;  // index -> slot
};

PreparedPoints prepare(std::span<const ClusterPoint> points) {
  check_unique_indices(points);
  PreparedPoints out;
  out.sorted.assign(points.begin(), points.end());
  // Index order keeps floating-point sums independent of input order.
  std::sort(out.sorted.begin(), out.sorted.end(),
            [](const auto& a, const auto& b) { return a.index < b.index; });

  GeoPoint origin;
  for (const auto& p : out.sorted) {
    validate_geo_point(p.position);
    if (!std::isfinite(p.confidence)) {
      fail(ErrorKind::kValidation, "cluster input confidence must be finite");
    }
    origin.latitude += p.position.latitude;
    origin.longitude += p.position.longitude;
  }
  origin.latitude /= static_cast<double>(out.sorted.size());
  origin.longitude /= static_cast<double>(out.sorted.size());

  std::vector<std::string> ids;
  for (const auto& p : out.sorted) {
    if (!p.image_id.empty()) ids.push_back(p.image_id);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

  out.planar.reserve(out.sorted.size());
  for (std::size_t slot = 0; slot < out.sorted.size(); ++slot) {
    const auto& p = out.sorted[slot];
    const EnuOffset o = geo_offset(origin, p.position);
    std::size_t group = kNoGroup;
    if (!p.image_id.empty()) {
      group = static_cast<std::size_t>(
          std::lower_bound(ids.begin(), ids.end(), p.image_id) - ids.begin());
    }
    out.planar.push_back({o.east_m, o.north_m, p.class_label, p.index, group});
    out.position_of.emplace(p.index, slot);
  }
  return out;
}

std::vector<TreeRecord> make_records(
    const PreparedPoints& prep,
    std::vector<std::vector<std::size_t>> components) {
  std::vector<TreeRecord> records;
  records.reserve(components.size());
  for (auto& members : components) {
    TreeRecord rec;
    rec.tree_id = records.size();
    const ClusterPoint& first = prep.sorted[prep.position_of.at(members.front())];
    rec.class_label = first.class_label;
    rec.support = members.size();
    if (members.size() == 1) {
      rec.position = first.position;
      rec.mean_confidence = first.confidence;
    } else {
      // geo_offset is affine in (lat, lon) for a fixed origin, so the
      // weighted mean in degrees equals the weighted mean in the plane.
      double w_sum = 0.0;
      for (const auto idx : members) {
        w_sum += prep.sorted[prep.position_of.at(idx)].confidence;
      }
      const bool uniform = !(w_sum > 0.0);
      double lat = 0.0, lon = 0.0, total = 0.0, conf_sum = 0.0;
      for (const auto idx : members) {
        const ClusterPoint& p = prep.sorted[prep.position_of.at(idx)];
        const double w = uniform ? 1.0 : p.confidence;
        lat += w * p.position.latitude;
        lon += w * p.position.longitude;
        total += w;
        conf_sum += p.confidence;
      }
      rec.position = {lat / total, lon / total};
      rec.mean_confidence = conf_sum / static_cast<double>(members.size());
    }
    rec.member_indices = std::move(members);
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace

std::string_view to_string(DedupMethod m) {
  return m == DedupMethod::kRadius ? "radius" : "registered";
}

std::optional<DedupMethod> parse_dedup_method(std::string_view name) {
  if (name == "radius") return DedupMethod::kRadius;
  if (name == "registered") return DedupMethod::kRegistered;
  return std::nullopt;
}

std::vector<std::vector<std::size_t>> cluster_planar(
    std::span<const PlanarPoint> points, double merge_radius_m) {
  check_radius(merge_radius_m);
  check_unique_indices(points);
  DisjointSets sets(points.size());
  for (const auto& pair : candidate_pairs(points, merge_radius_m)) {
    sets.unite(pair.a, pair.b);
  }
  return components_of(sets, points);
}

std::vector<std::vector<std::size_t>> link_image_exclusive(
    std::span<const PlanarPoint> points, double merge_radius_m) {
  check_radius(merge_radius_m);
  check_unique_indices(points);
  DisjointSets sets(points.size());
  std::vector<std::vector<std::size_t>> groups(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].group != kNoGroup) groups[i].push_back(points[i].group);
  }
  for (const auto& pair : candidate_pairs(points, merge_radius_m)) {
    const std::size_t a = sets.find(pair.a);
    const std::size_t b = sets.find(pair.b);
    if (a == b || sorted_intersect(groups[a], groups[b])) continue;
    std::vector<std::size_t> merged;
    merged.reserve(groups[a].size() + groups[b].size());
    std::merge(groups[a].begin(), groups[a].end(), groups[b].begin(),
               groups[b].end(), std::back_inserter(merged));
    groups[a].clear();
    groups[b].clear();
    sets.unite(a, b);
    groups[sets.find(a)] = std::move(merged);
  }
  return components_of(sets, points);
}

std::vector<std::vector<std::size_t>> deduplicate_planar(
    std::span<const PlanarPoint> points, double merge_radius_m,
    const RegistrationOptions& options) {
  std::vector<PlanarPoint> shifted(points.begin(), points.end());
  auto components = link_image_exclusive(shifted, merge_radius_m);

  std::unordered_map<std::size_t, std::size_t> slot_of;
  for (std::size_t i = 0; i < shifted.size(); ++i) slot_of.emplace(shifted[i].index, i);

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    std::unordered_map<std::size_t, std::vector<double>> de, dn;
    for (const auto& members : components) {
      if (members.size() < 2) continue;
      double se = 0.0, sn = 0.0;
      for (const auto idx : members) {
        se += shifted[slot_of.at(idx)].east_m;
        sn += shifted[slot_of.at(idx)].north_m;
      }
      const double k = static_cast<double>(members.size() - 1);
      for (const auto idx : members) {
        const auto& p = shifted[slot_of.at(idx)];
        if (p.group == kNoGroup) continue;
        de[p.group].push_back((se - p.east_m) / k - p.east_m);
        dn[p.group].push_back((sn - p.north_m) / k - p.north_m);
      }
    }
    if (de.empty()) break;

    // Sorted group order keeps the gauge (mean shift) sum deterministic.
    std::map<std::size_t, EnuOffset> shift;
    for (auto& [group, values] : de) {
      shift[group] = {median(values), median(dn.at(group))};
    }
    double mean_e = 0.0, mean_n = 0.0;
    for (const auto& [group, o] : shift) {
      mean_e += o.east_m;
      mean_n += o.north_m;
    }
    mean_e /= static_cast<double>(shift.size());
    mean_n /= static_cast<double>(shift.size());
    for (auto& p : shifted) {
      const auto it = shift.find(p.group);
      if (it == shift.end()) continue;
      p.east_m += it->second.east_m - mean_e;
      p.north_m += it->second.north_m - mean_n;
    }

    auto next = link_image_exclusive(shifted, merge_radius_m);
    if (next == components) break;
    components = std::move(next);
  }
  return components;
}

std::vector<TreeRecord> cluster(std::span<const ClusterPoint> points,
                                double merge_radius_m) {
  return build_tree_records(points, merge_radius_m, DedupMethod::kRadius);
}

std::vector<TreeRecord> deduplicate(std::span<const ClusterPoint> points,
                                    double merge_radius_m,
                                    const RegistrationOptions& options) {
  check_radius(merge_radius_m);
  if (points.empty()) return {};
  const auto prep = prepare(points);
  return make_records(prep, deduplicate_planar(prep.planar, merge_radius_m, options));
}

std::vector<TreeRecord> build_tree_records(std::span<const ClusterPoint> points,
                                           double merge_radius_m,
                                           DedupMethod method) {
  check_radius(merge_radius_m);
  if (points.empty()) return {};
  if (method == DedupMethod::kRegistered) return deduplicate(points, merge_radius_m);
  const auto prep = prepare(points);
  return make_records(prep, cluster_planar(prep.planar, merge_radius_m));
}

std::vector<ClusterPoint> to_cluster_points(
    std::span<const GeolocatedDetection> detections) {
  std::vector<ClusterPoint> out;
  out.reserve(detections.size());
  for (const auto& d : detections) {
    out.push_back({d.position, d.class_label, d.confidence, d.detection_index,
                   d.image_id});
  }
  return out;
}

InventoryReport build_inventory(std::span<const TreeRecord> records,
                                double merge_radius_m) {
  InventoryReport report;
  report.merge_radius_m = merge_radius_m;
  for (const TreeClass c : kAllTreeClasses) report.per_class[c] = 0;
  for (const auto& r : records) {
    ++report.per_class[r.class_label];
    ++report.total_trees;
    report.detections_consumed += r.support;
  }
  return report;
}

std::string write_inventory_geojson(std::span<const TreeRecord> records) {
  ordered_json features = ordered_json::array();
  for (const auto& r : records) {
    ordered_json f;
    f["type"] = "Feature";
    f["geometry"] = {{"type", "Point"},
                     {"coordinates", {r.position.longitude, r.position.latitude}}};
    f["properties"] = {{"tree_id", r.tree_id},
                       {"class_label", std::string(to_string(r.class_label))},
                       {"support", r.support},
                       {"mean_confidence", r.mean_confidence},
                       {"member_indices", r.member_indices}};
    features.push_back(std::move(f));
  }
  ordered_json doc;
  doc["type"] = "FeatureCollection";
  doc["features"] = std::move(features);
  return doc.dump(2) + "\n";
}

std::string write_inventory_csv(std::span<const TreeRecord> records) {
  std::string out =
      "tree_id,class_label,latitude,longitude,support,mean_confidence\n";
  for (const auto& r : records) {
    out += std::to_string(r.tree_id) + ',' +
           std::string(to_string(r.class_label)) + ',' +
           text::format_number(r.position.latitude) + ',' +
           text::format_number(r.position.longitude) + ',' +
           std::to_string(r.support) + ',' +
           text::format_number(r.mean_confidence) + '\n';
  }
  return out;
}

std::string write_inventory_report_json(const InventoryReport& report) {
  ordered_json counts;
  for (const auto& [cls, n] : report.per_class) {
    counts[std::string(to_string(cls))] = n;
  }
  ordered_json doc;
  doc["counts"] = std::move(counts);
  doc["total_trees"] = report.total_trees;
  doc["detections_consumed"] = report.detections_consumed;
  doc["merge_radius_m"] = report.merge_radius_m;
  return doc.dump(2) + "\n";
}

namespace {

std::vector<TreeRecord> parse_inventory_geojson(std::string_view content) {
  json doc;
  try {
    doc = json::parse(content);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::kParse, std::string("inventory GeoJSON: ") + e.what());
  }
  const auto features = doc.find("features");
  if (!doc.is_object() || features == doc.end() || !features->is_array()) {
    fail(ErrorKind::kParse, "inventory GeoJSON must be a FeatureCollection");
  }
  std::vector<TreeRecord> out;
  for (std::size_t i = 0; i < features->size(); ++i) {
    const auto& f = (*features)[i];
    const std::string rec = "feature " + std::to_string(i);
    try {
      const auto& coords = f.at("geometry").at("coordinates");
      const auto& props = f.at("properties");
      TreeRecord r;
      r.position = {coords.at(1).get<double>(), coords.at(0).get<double>()};
      r.tree_id = props.at("tree_id").get<std::size_t>();
      const auto cls =
          parse_tree_class(props.at("class_label").get<std::string>());
      if (!cls) fail(ErrorKind::kValidation, rec + ": unknown class_label");
      r.class_label = *cls;
      r.support = props.at("support").get<std::size_t>();
      r.mean_confidence = props.at("mean_confidence").get<double>();
      if (const auto m = props.find("member_indices"); m != props.end()) {
        r.member_indices = m->get<std::vector<std::size_t>>();
        if (r.member_indices.size() != r.support) {
          fail(ErrorKind::kValidation,
               rec + ": support does not match member_indices");
        }
      }
      validate_geo_point(r.position);
      out.push_back(std::move(r));
    } catch (const json::exception& e) {
      fail(ErrorKind::kField, rec + ": " + e.what());
    }
  }
  return out;
}

std::vector<TreeRecord> parse_inventory_csv(std::string_view content) {
  const auto rows = text::parse_csv(content);
  std::vector<TreeRecord> out;
  if (rows.empty()) return out;
  if (rows[0].fields.size() != 6 || rows[0].fields[0] != "tree_id") {
    fail(ErrorKind::kParse, "inventory CSV: unexpected header");
  }
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& f = rows[r].fields;
    const std::string rec = "line " + std::to_string(rows[r].line);
    if (f.size() != 6) fail(ErrorKind::kParse, rec + ": expected 6 fields");
    double id = 0, lat = 0, lon = 0, support = 0, conf = 0;
    if (!text::parse_number(f[0], id) || !text::parse_number(f[2], lat) ||
        !text::parse_number(f[3], lon) || !text::parse_number(f[4], support) ||
        !text::parse_number(f[5], conf) || id < 0 || support < 1) {
      fail(ErrorKind::kField, rec + ": malformed numeric field");
    }
    const auto cls = parse_tree_class(f[1]);
    if (!cls) fail(ErrorKind::kValidation, rec + ": unknown class_label");
    TreeRecord t;
    t.tree_id = static_cast<std::size_t>(id);
    t.class_label = *cls;
    t.position = {lat, lon};
    t.support = static_cast<std::size_t>(support);
    t.mean_confidence = conf;
    validate_geo_point(t.position);
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace

std::vector<TreeRecord> parse_inventory(std::string_view content) {
  const auto first = content.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  return content[first] == '{' ? parse_inventory_geojson(content)
                               : parse_inventory_csv(content);
}

}  // namespace treeloc
