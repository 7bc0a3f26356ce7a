#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "treeloc/geodesy.hpp"
#include "treeloc/inventory.hpp"
#include "treeloc/simulator.hpp"

namespace treeloc {

/// Mean, max and population standard deviation (divisor n) of a set of
/// geolocation errors, in meters.
struct ErrorStats {
  double mean_m = 0.0;
  double max_m = 0.0;
  double std_m = 0.0;
  std::size_t n = 0;
};

struct MatchReport {
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
  double precision = 1.0;  // 1.0 when nothing was predicted
  double recall = 1.0;     // 1.0 when there was nothing to find
  double match_radius_m = 0.0;
  /// (predicted index, truth index) for each true positive, in match order.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

ErrorStats error_stats(std::span<const double> distances_m);

/// `pairing[i]` is the index into `truth` of the point paired with
/// `estimates[i]`. Distances are measured in the tangent plane at the
/// truth point.
ErrorStats geolocation_errors(std::span<const GeoPoint> estimates,
                              std::span<const GeoPoint> truth,
                              std::span<const std::size_t> pairing);

/// Greedy same-class matching by ascending distance, ties broken by
/// (predicted index, truth index); each side is matched at most once.
MatchReport match_trees(std::span<const TreeRecord> predicted,
                        std::span<const sim::GroundTruthTree> truth,
                        double match_radius_m);

struct EvalReport {
  std::optional<ErrorStats> error_stats;  // absent when nothing matched
  MatchReport match;
};

/// Matches an inventory to truth, then measures errors over matched pairs.
EvalReport evaluate_inventory(std::span<const TreeRecord> predicted,
                              std::span<const sim::GroundTruthTree> truth,
                              double match_radius_m);

std::string write_eval_report_json(const EvalReport& report);

}  // namespace treeloc
