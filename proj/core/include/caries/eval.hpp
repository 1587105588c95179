#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "caries/geometry.hpp"
#include "caries/postprocess.hpp"

namespace caries {

struct EvalConfig {
  /// A detection hits a truth only when IoU is strictly greater than this.
  double iou_cutoff = 0.8;

  void validate() const;
};

struct MatchedPair {
  std::size_t detection = 0;
  std::size_t truth = 0;
  double iou = 0.0;
};

/// One-to-one assignment for a single image.
struct MatchOutcome {
  std::vector<MatchedPair> matched;
  std::vector<std::size_t> false_positives;  // unmatched detection indices
  std::vector<std::size_t> false_negatives;  // unmatched truth indices

  std::int64_t tp() const noexcept { return static_cast<std::int64_t>(matched.size()); }
  std::int64_t fp() const noexcept { return static_cast<std::int64_t>(false_positives.size()); }
  std::int64_t fn() const noexcept { return static_cast<std::int64_t>(false_negatives.size()); }
};

/// Greedy matching on a precomputed IoU table (rows: detections, columns:
/// truths). Pairs are accepted in descending IoU order, ties by detection
/// then truth index, skipping already-used rows and columns. Only pairs with
/// iou > cutoff are eligible.
MatchOutcome greedy_match(const std::vector<std::vector<double>>& iou, std::size_t truth_count,
                          double cutoff);

/// Box-vs-polygon pixel IoU for every pair, then greedy_match.
MatchOutcome match_detections(std::span<const Detection> detections, std::span<const Polygon> truths,
                              int width, int height, const EvalConfig& config);

/// Each reader polygon becomes the tight box of its rasterization, then it is
/// scored exactly like a system detection.
MatchOutcome score_reader_polygons(std::span<const Polygon> reader_regions, std::span<const Polygon> truths,
                                   int width, int height, const EvalConfig& config);

struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// 0/0 ratios are 0, except tp = fp = fn = 0 which is perfect agreement (all 1).
Metrics compute_metrics(std::int64_t tp, std::int64_t fp, std::int64_t fn);

/// Percentages in tenths of a percent, rounded half-up from the exact counts.
struct PercentTenths {
  std::int64_t recall = 0;
  std::int64_t precision = 0;
  std::int64_t f1 = 0;
};
PercentTenths percent_tenths(std::int64_t tp, std::int64_t fp, std::int64_t fn);

/// Half-up rounding of num/den * 1000 (den > 0).
std::int64_t round_half_up_tenths(std::int64_t num, std::int64_t den);

struct ReaderOutcomes {
  std::string name;
  std::vector<std::string> images;      // parallel to outcomes
  std::vector<MatchOutcome> outcomes;
};

struct ReaderMetrics {
  std::string name;
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  Metrics metrics;
  PercentTenths percent;
};

struct MetricsReport {
  double iou_cutoff = 0.8;
  std::size_t image_count = 0;
  std::vector<ReaderMetrics> per_reader;
};

/// Sums counts over the corpus per reader, then computes metrics once.
/// Every reader must cover the same image set (ConfigError otherwise).
MetricsReport aggregate_and_report(std::span<const ReaderOutcomes> readers, double iou_cutoff);

/// Rows Recall / Precision / F1-Score, one column per reader, one decimal.
std::string render_table(const MetricsReport& report);

std::string report_to_json(const MetricsReport& report);
MetricsReport report_from_json(const std::string& text);
void save_report(const MetricsReport& report, const std::filesystem::path& path);
MetricsReport load_report(const std::filesystem::path& path);

}  // namespace caries
