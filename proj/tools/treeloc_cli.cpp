// treeloc: geolocate tree detections from drone imagery and count unique
// trees. Exit codes: 0 ok, 1 validation or configuration error, 2 I/O error.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>

#include "treeloc/config.hpp"
#include "treeloc/detections.hpp"
#include "treeloc/error.hpp"
#include "treeloc/eval.hpp"
#include "treeloc/inventory.hpp"
#include "treeloc/metadata.hpp"
#include "treeloc/projection.hpp"
#include "treeloc/simulator.hpp"
#include "treeloc/text.hpp"

namespace fs = std::filesystem;
using namespace treeloc;

namespace {

enum class OutputFormat { kGeoJson, kCsv };

const std::map<std::string, OutputFormat> kFormats{{"geojson", OutputFormat::kGeoJson},
                                                   {"csv", OutputFormat::kCsv}};

const char* extension(OutputFormat f) { return f == OutputFormat::kCsv ? ".csv" : ".geojson"; }

PipelineConfig load_config(const std::string& path) {
  if (path.empty()) return {};
  return parse_config_json(text::read_file(path));
}

// Writes to `path`, or to stdout when no path was given.
void deliver(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
  } else {
    text::write_file(path, content);
  }
}

std::vector<GeolocatedDetection> geolocate_files(const std::string& manifest_path,
                                                 const std::string& detections_path,
                                                 const PipelineConfig& cfg) {
  const auto manifest = parse_manifest(text::read_file(manifest_path),
                                       manifest_format_for(manifest_path),
                                       cfg.nadir_tolerance_deg);
  const auto detections = parse_detections(text::read_file(detections_path));
  return geolocate_all(detections, manifest, cfg.geolocation_params(),
                       cfg.confidence_threshold);
}

std::string format_geolocated(const std::vector<GeolocatedDetection>& g, OutputFormat f) {
  return f == OutputFormat::kCsv ? write_geolocated_csv(g) : write_geolocated_geojson(g);
}

std::string format_inventory(const std::vector<TreeRecord>& r, OutputFormat f) {
  return f == OutputFormat::kCsv ? write_inventory_csv(r) : write_inventory_geojson(r);
}

std::vector<TreeRecord> inventory_of(const std::vector<GeolocatedDetection>& g,
                                     const PipelineConfig& cfg) {
  const auto points = to_cluster_points(g);
  return build_tree_records(points, cfg.merge_radius_m, cfg.dedup_method);
}

fs::path report_path_for(const fs::path& inventory_path) {
  auto p = inventory_path;
  p.replace_extension(".report.json");
  return p;
}

EvalReport evaluate_files(const std::vector<TreeRecord>& inventory,
                          const std::string& truth_path, const PipelineConfig& cfg) {
  const auto truth = sim::parse_ground_truth_csv(text::read_file(truth_path));
  return evaluate_inventory(inventory, truth, cfg.match_radius_m);
}

std::string simulation_summary(const sim::SimResult& r) {
  nlohmann::ordered_json j;
  j["frames"] = r.manifest.size();
  j["trees"] = r.ground_truth.size();
  j["detections"] = r.detections.size();
  return j.dump(2) + "\n";
}

int exit_code_for(ErrorKind kind) { return kind == ErrorKind::kIo ? 2 : 1; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geolocate and count trees detected in nadir drone imagery"};
  app.require_subcommand(1);

  std::string config_path, out_path, scenario_path, manifest_path, detections_path,
      geolocated_path, inventory_path, truth_path;
  OutputFormat format = OutputFormat::kGeoJson;

  auto add_common = [&](CLI::App* cmd, bool with_format) {
    cmd->add_option("--config", config_path, "Pipeline configuration JSON")
        ->check(CLI::ExistingFile);
    if (with_format) {
      cmd->add_option("--format", format, "Output format")
          ->transform(CLI::CheckedTransformer(kFormats, CLI::ignore_case));
    }
  };

  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic survey");
  simulate->add_option("scenario", scenario_path, "Scenario JSON")->required();
  simulate->add_option("--out", out_path, "Output directory")->required();

  auto* geolocate = app.add_subcommand("geolocate", "Project detections to the ground");
  geolocate->add_option("manifest", manifest_path, "Image manifest (.csv or .json)")->required();
  geolocate->add_option("detections", detections_path, "Detections JSON")->required();
  geolocate->add_option("--out", out_path, "Output file (stdout if omitted)");
  add_common(geolocate, true);

  auto* inventory = app.add_subcommand("inventory", "Merge geolocated detections into trees");
  inventory->add_option("geolocated", geolocated_path, "Geolocated detections")->required();
  inventory->add_option("--out", out_path, "Inventory file; report goes beside it")->required();
  add_common(inventory, true);

  auto* eval = app.add_subcommand("eval", "Score an inventory against ground truth");
  eval->add_option("inventory", inventory_path, "Inventory GeoJSON or CSV")->required();
  eval->add_option("truth", truth_path, "Ground truth CSV")->required();
  eval->add_option("--out", out_path, "Report file (stdout if omitted)");
  add_common(eval, false);

  auto* run = app.add_subcommand("run", "geolocate, inventory and optionally eval");
  run->add_option("manifest", manifest_path, "Image manifest (.csv or .json)")->required();
  run->add_option("detections", detections_path, "Detections JSON")->required();
  run->add_option("--truth", truth_path, "Ground truth CSV to evaluate against");
  run->add_option("--out", out_path, "Output directory")->required();
  add_common(run, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const auto cfg = load_config(config_path);
    validate_config(cfg);

    if (*simulate) {
      const auto scenario = sim::parse_scenario_json(text::read_file(scenario_path));
      const auto result = sim::generate(scenario);
      sim::emit(result, out_path);
      std::cout << simulation_summary(result);
    } else if (*geolocate) {
      const auto g = geolocate_files(manifest_path, detections_path, cfg);
      deliver(out_path, format_geolocated(g, format));
      std::cerr << "geolocated " << g.size() << " detections\n";
    } else if (*inventory) {
      const auto g = parse_geolocated(text::read_file(geolocated_path));
      const auto records = inventory_of(g, cfg);
      const auto report = write_inventory_report_json(build_inventory(records, cfg.merge_radius_m));
      text::write_file(out_path, format_inventory(records, format));
      text::write_file(report_path_for(out_path), report);
      std::cout << report;
    } else if (*eval) {
      const auto records = parse_inventory(text::read_file(inventory_path));
      deliver(out_path, write_eval_report_json(evaluate_files(records, truth_path, cfg)));
    } else if (*run) {
      const fs::path dir = out_path;
      std::error_code ec;
      fs::create_directories(dir, ec);
      if (ec) fail(ErrorKind::kIo, "cannot create directory " + dir.string() + ": " + ec.message());
      const auto g = geolocate_files(manifest_path, detections_path, cfg);
      text::write_file(dir / (std::string("geolocated") + extension(format)),
                       format_geolocated(g, format));
      const auto records = inventory_of(g, cfg);
      const auto inv_path = dir / (std::string("inventory") + extension(format));
      const auto report = write_inventory_report_json(build_inventory(records, cfg.merge_radius_m));
      text::write_file(inv_path, format_inventory(records, format));
      text::write_file(report_path_for(inv_path), report);
      if (!truth_path.empty()) {
        const auto e = write_eval_report_json(evaluate_files(records, truth_path, cfg));
        text::write_file(dir / "eval.json", e);
        std::cout << e;
      } else {
        std::cout << report;
      }
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
