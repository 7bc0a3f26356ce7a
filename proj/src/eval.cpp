#include "treeloc/eval.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <tuple>

#include "treeloc/error.hpp"

namespace treeloc {

ErrorStats error_stats(std::span<const double> distances_m) {
  if (distances_m.empty()) {
    fail(ErrorKind::kValidation, "error statistics need at least one pair");
  }
  ErrorStats s;
  s.n = distances_m.size();
  double sum = 0.0;
  for (const double d : distances_m) {
    if (!std::isfinite(d) || d < 0.0) {
      fail(ErrorKind::kValidation, "distances must be finite and >= 0");
    }
    sum += d;
    s.max_m = std::max(s.max_m, d);
  }
  s.mean_m = sum / static_cast<double>(s.n);
  double sq = 0.0;
  for (const double d : distances_m) sq += (d - s.mean_m) * (d - s.mean_m);
  s.std_m = std::sqrt(sq / static_cast<double>(s.n));
  return s;
}

ErrorStats geolocation_errors(std::span<const GeoPoint> estimates,
                              std::span<const GeoPoint> truth,
                              std::span<const std::size_t> pairing) {
  if (pairing.size() != estimates.size()) {
    fail(ErrorKind::kValidation, "pairing must map every estimate to a truth point");
  }
  std::vector<double> distances;
  distances.reserve(estimates.size());
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    if (pairing[i] >= truth.size()) {
      fail(ErrorKind::kValidation,
           "pairing for estimate " + std::to_string(i) + " is out of range");
    }
    distances.push_back(geo_offset(truth[pairing[i]], estimates[i]).norm());
  }
  return error_stats(distances);
}

MatchReport match_trees(std::span<const TreeRecord> predicted,
                        std::span<const sim::GroundTruthTree> truth,
                        double match_radius_m) {
  if (!std::isfinite(match_radius_m) || !(match_radius_m > 0.0)) {
    fail(ErrorKind::kConfig, "match radius must be a positive finite number");
  }
  MatchReport report;
  report.match_radius_m = match_radius_m;

  // All candidate pairs are measured in one plane centered on the mean point.
  GeoPoint origin;
  const std::size_t n_points = predicted.size() + truth.size();
  for (const auto& p : predicted) {
    origin.latitude += p.position.latitude;
    origin.longitude += p.position.longitude;
  }
  for (const auto& t : truth) {
    origin.latitude += t.base.latitude;
    origin.longitude += t.base.longitude;
  }
  std::vector<std::tuple<double, std::size_t, std::size_t>> candidates;
  if (!predicted.empty() && !truth.empty()) {
    origin.latitude /= static_cast<double>(n_points);
    origin.longitude /= static_cast<double>(n_points);
    std::vector<EnuOffset> pred_xy, truth_xy;
    for (const auto& p : predicted) pred_xy.push_back(geo_offset(origin, p.position));
    for (const auto& t : truth) truth_xy.push_back(geo_offset(origin, t.base));
    for (std::size_t i = 0; i < predicted.size(); ++i) {
      for (std::size_t j = 0; j < truth.size(); ++j) {
        if (predicted[i].class_label != truth[j].class_label) continue;
        const double d = std::hypot(pred_xy[i].east_m - truth_xy[j].east_m,
                                    pred_xy[i].north_m - truth_xy[j].north_m);
        if (d <= match_radius_m) candidates.emplace_back(d, i, j);
      }
    }
  }
  std::sort(candidates.begin(), candidates.end());

  std::vector<bool> pred_used(predicted.size(), false);
  std::vector<bool> truth_used(truth.size(), false);
  for (const auto& [d, i, j] : candidates) {
    if (pred_used[i] || truth_used[j]) continue;
    pred_used[i] = truth_used[j] = true;
    report.pairs.emplace_back(i, j);
  }
  report.true_positives = report.pairs.size();
  report.false_positives = predicted.size() - report.true_positives;
  report.false_negatives = truth.size() - report.true_positives;
  if (!predicted.empty()) {
    report.precision = static_cast<double>(report.true_positives) /
                       static_cast<double>(predicted.size());
  }
  if (!truth.empty()) {
    report.recall = static_cast<double>(report.true_positives) /
                    static_cast<double>(truth.size());
  }
  return report;
}

EvalReport evaluate_inventory(std::span<const TreeRecord> predicted,
                              std::span<const sim::GroundTruthTree> truth,
                              double match_radius_m) {
  EvalReport report;
  report.match = match_trees(predicted, truth, match_radius_m);
  if (!report.match.pairs.empty()) {
    std::vector<GeoPoint> est, tru;
    std::vector<std::size_t> pairing;
    for (const auto& [i, j] : report.match.pairs) {
      est.push_back(predicted[i].position);
      tru.push_back(truth[j].base);
      pairing.push_back(pairing.size());
    }
    report.error_stats = geolocation_errors(est, tru, pairing);
  }
  return report;
}

std::string write_eval_report_json(const EvalReport& report) {
  using nlohmann::ordered_json;
  ordered_json doc;
  if (report.error_stats) {
    const auto& s = *report.error_stats;
    doc["error_stats"] = {{"mean_m", s.mean_m},
                          {"max_m", s.max_m},
                          {"std_m", s.std_m},
                          {"n", s.n},
                          {"std_kind", "population"}};
  } else {
    doc["error_stats"] = nullptr;
  }
  const auto& m = report.match;
  doc["match"] = {{"tp", m.true_positives},
                  {"fp", m.false_positives},
                  {"fn", m.false_negatives},
                  {"precision", m.precision},
                  {"recall", m.recall},
                  {"match_radius_m", m.match_radius_m}};
  return doc.dump(2) + "\n";
}

}  // namespace treeloc
