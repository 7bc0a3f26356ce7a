#pragma once

#include <string>
#include <string_view>

#include "treeloc/inventory.hpp"
#include "treeloc/metadata.hpp"
#include "treeloc/projection.hpp"

namespace treeloc {

/// Every pipeline tunable. Heights are configuration defaults, not measured
/// values; adjust them to the surveyed orchard.
struct PipelineConfig {
  double avg_palm_height_m = 6.0;
  double avg_other_tree_height_m = 4.0;
  double merge_radius_m = kDefaultMergeRadiusM;
  double confidence_threshold = 0.0;
  double match_radius_m = 4.0;
  double nadir_tolerance_deg = kDefaultNadirToleranceDeg;
  DedupMethod dedup_method = DedupMethod::kRegistered;

  GeolocationParams geolocation_params() const {
    return {avg_palm_height_m, avg_other_tree_height_m};
  }
};

void validate_config(const PipelineConfig& c);

/// All fields optional; unknown keys are rejected. Throws kConfig.
PipelineConfig parse_config_json(std::string_view content);
std::string write_config_json(const PipelineConfig& c);

}  // namespace treeloc
