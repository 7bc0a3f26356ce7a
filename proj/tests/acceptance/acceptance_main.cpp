// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// nonzero if any fails. argv[1] is the path of the treeloc executable.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "treeloc/config.hpp"
#include "treeloc/detections.hpp"
#include "treeloc/eval.hpp"
#include "treeloc/geodesy.hpp"
#include "treeloc/inventory.hpp"
#include "treeloc/metadata.hpp"
#include "treeloc/projection.hpp"
#include "treeloc/simulator.hpp"
#include "treeloc/text.hpp"

namespace fs = std::filesystem;
using namespace treeloc;

namespace {

int failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail) {
  std::printf("[%s] %d %s: %s\n", ok ? "PASS" : "FAIL", id, name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

sim::NoiseSpec noise_preset() { return {1.0, 1.0, 0.5, 5.0, 0.0, 0.0}; }

const ImageMeta& frame_of(const std::map<std::string, const ImageMeta*>& frames,
                          const std::string& id) {
  return *frames.at(id);
}

std::map<std::string, const ImageMeta*> index_frames(const std::vector<ImageMeta>& manifest) {
  std::map<std::string, const ImageMeta*> out;
  for (const auto& m : manifest) out[m.image_id] = &m;
  return out;
}

// Ground distance from each true detection's geolocation to its source tree.
std::vector<double> detection_errors(const sim::SimResult& r, bool per_tree_height,
                                     const GeolocationParams& params) {
  const auto frames = index_frames(r.manifest);
  std::vector<double> out;
  for (std::size_t i = 0; i < r.detections.size(); ++i) {
    if (!r.provenance[i]) continue;
    const auto& tree = r.ground_truth[*r.provenance[i]];
    const GeolocationParams p =
        per_tree_height ? GeolocationParams{tree.height_m, tree.height_m} : params;
    const auto pos = geolocate(r.detections[i], frame_of(frames, r.detections[i].image_id), p);
    out.push_back(geo_offset(tree.base, pos).norm());
  }
  return out;
}

void zero_noise_inverse() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(1001);
  std::uniform_real_distribution<double> yaw(-180, 180), lat(-50, 50), lon(-179, 179),
      jitter(0, 0.4), spread(0, 2);
  std::uniform_int_distribution<int> dim(10, 14);
  double worst = 0.0;
  std::size_t detections = 0, min_frames = SIZE_MAX, min_trees = SIZE_MAX;
  for (std::uint64_t k = 0; k < 10; ++k) {
    sim::Scenario s;
    s.seed = k;
    s.orchard.rows = dim(rng);
    s.orchard.cols = dim(rng);
    s.orchard.origin = {lat(rng), lon(rng)};
    s.orchard.jitter_frac = jitter(rng);
    s.orchard.palm_height = {6.0, spread(rng)};
    s.orchard.other_tree_fraction = 0.25;
    s.flight.yaw_deg = yaw(rng);
    const auto r = sim::generate(s);
    const auto e = detection_errors(r, true, {});
    for (const double d : e) worst = std::max(worst, d);
    detections += e.size();
    min_frames = std::min(min_frames, r.manifest.size());
    min_trees = std::min(min_trees, r.ground_truth.size());
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ostringstream d;
  d << "max error " << fmt("%.3g", worst) << " m over " << detections
    << " detections, >= " << min_trees << " trees and >= " << min_frames << " frames per scenario, "
    << fmt("%.2f", secs) << " s";
  report(1, "zero-noise inverse", worst < 1e-6 && min_trees >= 100 && min_frames >= 20 && secs < 5,
         d.str());
}

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

void geolocation_error_band() {
  const PipelineConfig cfg;
  std::vector<double> pooled, seed_means;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    sim::Scenario s;
    s.seed = seed;
    s.orchard.jitter_frac = 0.3;
    s.noise = noise_preset();
    const auto r = sim::generate(s);
    const auto e = detection_errors(r, false, cfg.geolocation_params());
    seed_means.push_back(error_stats(e).mean_m);
    pooled.insert(pooled.end(), e.begin(), e.end());
  }
  const auto all = error_stats(pooled);
  const double lo = *std::min_element(seed_means.begin(), seed_means.end());
  const double hi = *std::max_element(seed_means.begin(), seed_means.end());
  const double q1 = quantile(pooled, 0.25), q3 = quantile(pooled, 0.75);
  std::ostringstream d;
  d << "pooled mean " << fmt("%.3f", all.mean_m) << " m (max " << fmt("%.2f", all.max_m)
    << ", std " << fmt("%.2f", all.std_m) << ", n " << all.n << "); per-seed means "
    << fmt("%.3f", lo) << ".." << fmt("%.3f", hi) << " m; IQR " << fmt("%.2f", q1) << ".."
    << fmt("%.2f", q3) << " m, 2.8 m " << (q1 <= 2.8 && 2.8 <= q3 ? "inside" : "outside")
    << " IQR";
  report(2, "geolocation error band", lo >= 1.0 && hi <= 5.0, d.str());
}

void exact_counting() {
  const PipelineConfig cfg;
  std::vector<std::string> bad;
  std::ostringstream counts;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    sim::Scenario s;
    s.seed = seed;
    s.orchard.jitter_frac = 0.3;
    s.noise = noise_preset();
    const auto r = sim::generate(s);
    const auto g = geolocate_all(r.detections, r.manifest, cfg.geolocation_params());
    const auto points = to_cluster_points(g);
    const auto records = build_tree_records(points, cfg.merge_radius_m, cfg.dedup_method);
    const auto inv = build_inventory(records, cfg.merge_radius_m);
    std::size_t min_support = SIZE_MAX;
    for (const auto& t : records) min_support = std::min(min_support, t.support);
    const auto palms = inv.per_class.at(TreeClass::kPalm);
    counts << (seed ? "," : "") << palms;
    if (palms != 100 || min_support < 2) bad.push_back(std::to_string(seed));
  }
  std::ostringstream d;
  d << "palm counts per seed [" << counts.str() << "] with merge radius "
    << fmt("%g", cfg.merge_radius_m) << " m";
  if (!bad.empty()) {
    d << "; failing seeds:";
    for (const auto& b : bad) d << " " << b;
  }
  report(3, "exact counting under overlap", bad.empty(), d.str());
}

std::set<std::set<std::size_t>> brute_force_partition(const std::vector<PlanarPoint>& pts,
                                                      double r) {
  const std::size_t n = pts.size();
  std::vector<std::size_t> label(n);
  for (std::size_t i = 0; i < n; ++i) label[i] = i;
  // Relabel to the minimum over linked pairs until a fixed point.
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (pts[i].class_label != pts[j].class_label) continue;
        const double de = pts[i].east_m - pts[j].east_m, dn = pts[i].north_m - pts[j].north_m;
        if (de * de + dn * dn > r * r || label[i] == label[j]) continue;
        label[i] = label[j] = std::min(label[i], label[j]);
        changed = true;
      }
    }
  }
  std::map<std::size_t, std::set<std::size_t>> groups;
  for (std::size_t i = 0; i < n; ++i) groups[label[i]].insert(pts[i].index);
  std::set<std::set<std::size_t>> out;
  for (auto& [k, g] : groups) out.insert(std::move(g));
  return out;
}

void clustering_equivalence() {
  std::mt19937_64 rng(2002);
  std::uniform_int_distribution<std::size_t> size(1, 500);
  std::uniform_real_distribution<double> extent(5, 300), radius(0.1, 8), u(0, 1);
  int mismatches = 0;
  std::size_t points = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = size(rng);
    const double ext = extent(rng), r = radius(rng);
    std::uniform_real_distribution<double> pos(0, ext);
    std::vector<PlanarPoint> pts(n);
    for (std::size_t i = 0; i < n; ++i) {
      pts[i] = {pos(rng), pos(rng), u(rng) < 0.7 ? TreeClass::kPalm : TreeClass::kOtherTree, i};
    }
    points += n;
    std::set<std::set<std::size_t>> fast;
    for (const auto& g : cluster_planar(pts, r)) fast.emplace(g.begin(), g.end());
    if (fast != brute_force_partition(pts, r)) ++mismatches;
  }
  report(4, "clustering oracle equivalence", mismatches == 0,
         std::to_string(mismatches) + " mismatches in 200 point sets (" + std::to_string(points) +
             " points)");
}

void geodesy_round_trip() {
  std::mt19937_64 rng(3003);
  std::uniform_real_distribution<double> lat(-60, 60), lon(-180, 180), ang(0, 2 * kPi),
      dist(0, 1000);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const GeoPoint a{lat(rng), lon(rng)};
    const double t = ang(rng), d = dist(rng);
    const EnuOffset sent{d * std::cos(t), d * std::sin(t)};
    const GeoPoint b = geo_apply(a, sent);
    const auto off = geo_offset(a, b);
    const auto back = geo_apply(a, off);
    // Offset recovery, and the point residual measured in meters at the target.
    worst = std::max(worst, std::hypot(off.east_m - sent.east_m, off.north_m - sent.north_m));
    worst = std::max(worst, geo_offset(b, back).norm());
  }
  // WGS84 closed-form oracles at the equator: N(0) * dlambda, and the
  // meridian arc for 0.001 deg by quadrature, frozen offline.
  const double east = geo_offset({0, 0}, {0, 0.001}).east_m;
  const double north = geo_offset({0, 0}, {0.001, 0}).north_m;
  const bool arcs = std::abs(east - 111.319490793274) < 0.01 &&
                    std::abs(north - 110.574275821707) < 0.01 && std::abs(east - 111.32) < 0.01;
  std::ostringstream d;
  d << "max round-trip residual " << fmt("%.3g", worst) << " m over 10000 pairs; 0.001 deg east "
    << fmt("%.4f", east) << " m, north " << fmt("%.4f", north) << " m";
  report(5, "geodesy round trip", worst < 1e-6 && arcs, d.str());
}

void statistics_reproduction() {
  const GeoPoint origin{24.1, 47.3};
  std::vector<GeoPoint> truth, est;
  std::vector<std::size_t> pairing;
  const double dist[] = {1, 2, 3};
  for (std::size_t i = 0; i < 3; ++i) {
    truth.push_back(geo_apply(origin, {40.0 * static_cast<double>(i), 0}));
    est.push_back(geo_apply(truth.back(), {0, dist[i]}));
    pairing.push_back(i);
  }
  const auto s = geolocation_errors(est, truth, pairing);
  EvalReport rep;
  rep.error_stats = s;
  const auto json = write_eval_report_json(rep);
  const bool fields = json.find("\"mean_m\"") != std::string::npos &&
                      json.find("\"max_m\"") != std::string::npos &&
                      json.find("\"std_m\"") != std::string::npos;
  const bool ok = std::abs(s.mean_m - 2.0) < 5e-4 && std::abs(s.max_m - 3.0) < 5e-4 &&
                  std::abs(s.std_m - 0.8165) < 1e-4 && fields;
  std::ostringstream d;
  d << "mean " << fmt("%.4f", s.mean_m) << ", max " << fmt("%.4f", s.max_m) << ", std "
    << fmt("%.4f", s.std_m) << "; report fields " << (fields ? "present" : "missing");
  report(6, "statistics reproduction", ok, d.str());
}

int run_cli(const std::string& cli, const std::string& args, const fs::path& stdout_path) {
  const std::string cmd = cli + " " + args + " > " + stdout_path.string() + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Every file under `dir`, keyed by relative path.
std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = text::read_file(e.path());
  }
  return out;
}

void determinism(const std::string& cli) {
  const fs::path root = fs::temp_directory_path() / "treeloc_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  text::write_file(root / "scenario.json",
                   R"({"seed": 5, "orchard": {"jitter_frac": 0.3, "other_tree_fraction": 0.2},)"
                   R"( "noise": {"gps_sigma_m": 1.0, "yaw_sigma_deg": 1.0, "alt_sigma_m": 0.5,)"
                   R"( "pixel_sigma_px": 5.0, "miss_rate": 0.05, "false_positive_rate": 0.02}})");
  const auto commands = [&](const fs::path& w) {
    const std::string sim = (w / "sim").string();
    return std::vector<std::string>{
        "simulate " + (root / "scenario.json").string() + " --out " + sim,
        "geolocate " + sim + "/manifest.csv " + sim + "/detections.json --out " +
            (w / "geo.geojson").string(),
        "geolocate " + sim + "/manifest.csv " + sim + "/detections.json --format csv --out " +
            (w / "geo.csv").string(),
        "inventory " + (w / "geo.geojson").string() + " --out " + (w / "inv.geojson").string(),
        "inventory " + (w / "geo.csv").string() + " --format csv --out " + (w / "inv.csv").string(),
        "eval " + (w / "inv.geojson").string() + " " + sim + "/ground_truth.csv --out " +
            (w / "eval.json").string(),
        "run " + sim + "/manifest.csv " + sim + "/detections.json --truth " + sim +
            "/ground_truth.csv --out " + (w / "run").string(),
    };
  };
  bool codes_ok = true;
  std::map<std::string, std::string> snaps[2];
  for (int pass = 0; pass < 2; ++pass) {
    const fs::path w = root / ("pass" + std::to_string(pass));
    fs::create_directories(w / "stdout");
    const auto cmds = commands(w);
    for (std::size_t i = 0; i < cmds.size(); ++i) {
      codes_ok = codes_ok && run_cli(cli, cmds[i], w / "stdout" / std::to_string(i)) == 0;
    }
    snaps[pass] = snapshot(w);
  }
  std::vector<std::string> differing;
  for (const auto& [name, bytes] : snaps[0]) {
    const auto it = snaps[1].find(name);
    if (it == snaps[1].end() || it->second != bytes) differing.push_back(name);
  }
  const bool ok = codes_ok && differing.empty() && snaps[0].size() == snaps[1].size() &&
                  snaps[0].size() >= 14;
  std::ostringstream d;
  d << snaps[0].size() << " outputs from 7 commands compared byte for byte";
  if (!codes_ok) d << "; a command exited nonzero";
  for (const auto& n : differing) d << "; differs: " << n;
  report(7, "determinism", ok, d.str());
  fs::remove_all(root);
}

void format_round_trips() {
  sim::Scenario s;
  s.seed = 9;
  s.orchard.jitter_frac = 0.3;
  s.orchard.other_tree_fraction = 0.3;
  s.noise = {1.0, 1.0, 0.5, 5.0, 0.05, 0.05};
  const auto r = sim::generate(s);
  std::vector<std::string> broken;
  const auto check = [&](const char* name, const std::string& first, const std::string& second) {
    if (first != second) broken.push_back(name);
  };
  const auto csv = write_manifest_csv(r.manifest);
  check("manifest csv", csv, write_manifest_csv(parse_manifest(csv, ManifestFormat::kCsv)));
  const auto json = write_manifest_json(r.manifest);
  check("manifest json", json, write_manifest_json(parse_manifest(json, ManifestFormat::kJson)));
  const auto dets = write_detections_json(r.detections);
  check("detections json", dets, write_detections_json(parse_detections(dets)));
  const PipelineConfig cfg;
  const auto g = geolocate_all(r.detections, r.manifest, cfg.geolocation_params());
  const auto points = to_cluster_points(g);
  const auto inv = write_inventory_geojson(
      build_tree_records(points, cfg.merge_radius_m, cfg.dedup_method));
  check("inventory geojson", inv, write_inventory_geojson(parse_inventory(inv)));
  std::ostringstream d;
  d << "manifest csv/json, detections json, inventory geojson over " << r.detections.size()
    << " detections";
  for (const auto& b : broken) d << "; mismatch: " << b;
  report(8, "format round trips", broken.empty(), d.str());
}

template <typename F>
void guarded(int id, const char* name, F&& f) {
  try {
    f();
  } catch (const std::exception& e) {
    report(id, name, false, std::string("threw: ") + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: %s <treeloc executable>\n", argv[0]);
    return 2;
  }
  const std::string cli = argv[1];
  guarded(1, "zero-noise inverse", zero_noise_inverse);
  guarded(2, "geolocation error band", geolocation_error_band);
  guarded(3, "exact counting under overlap", exact_counting);
  guarded(4, "clustering oracle equivalence", clustering_equivalence);
  guarded(5, "geodesy round trip", geodesy_round_trip);
  guarded(6, "statistics reproduction", statistics_reproduction);
  guarded(7, "determinism", [&] { determinism(cli); });
  guarded(8, "format round trips", format_round_trips);
  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
