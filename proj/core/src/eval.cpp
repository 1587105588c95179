#include "caries/eval.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>
#include <tuple>

#include "caries/error.hpp"
#include "json.hpp"

namespace caries {

using nlohmann::json;

void EvalConfig::validate() const {
  if (!(iou_cutoff > 0.0 && iou_cutoff <= 1.0)) throw ConfigError("iou_cutoff must lie in (0, 1]");
}

MatchOutcome greedy_match(const std::vector<std::vector<double>>& iou, std::size_t truth_count, double cutoff) {
  struct Candidate {
    double iou;
    std::size_t det;
    std::size_t truth;
  };
  std::vector<Candidate> candidates;
  for (std::size_t d = 0; d < iou.size(); ++d) {
    if (iou[d].size() != truth_count) throw ShapeError("IoU table row has the wrong length");
    for (std::size_t t = 0; t < truth_count; ++t) {
      if (iou[d][t] > cutoff) candidates.push_back({iou[d][t], d, t});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(b.iou, a.det, a.truth) < std::tie(a.iou, b.det, b.truth);
  });

  std::vector<char> det_used(iou.size(), 0);
  std::vector<char> truth_used(truth_count, 0);
  MatchOutcome out;
  for (const auto& c : candidates) {
    if (det_used[c.det] || truth_used[c.truth]) continue;
    det_used[c.det] = 1;
    truth_used[c.truth] = 1;
    out.matched.push_back({c.det, c.truth, c.iou});
  }
  for (std::size_t d = 0; d < iou.size(); ++d) {
    if (!det_used[d]) out.false_positives.push_back(d);
  }
  for (std::size_t t = 0; t < truth_count; ++t) {
    if (!truth_used[t]) out.false_negatives.push_back(t);
  }
  return out;
}

namespace {

MatchOutcome match_boxes(std::span<const BBox> boxes, std::span<const Polygon> truths, int width, int height,
                         const EvalConfig& config) {
  config.validate();
  std::vector<BinaryMask> truth_masks;
  truth_masks.reserve(truths.size());
  for (const auto& poly : truths) truth_masks.push_back(rasterize_polygon(poly, width, height));
  std::vector<std::vector<double>> table(boxes.size(), std::vector<double>(truths.size(), 0.0));
  for (std::size_t d = 0; d < boxes.size(); ++d) {
    for (std::size_t t = 0; t < truths.size(); ++t) table[d][t] = jaccard_box_mask(boxes[d], truth_masks[t]);
  }
  return greedy_match(table, truths.size(), config.iou_cutoff);
}

}  // namespace

MatchOutcome match_detections(std::span<const Detection> detections, std::span<const Polygon> truths,
                              int width, int height, const EvalConfig& config) {
  std::vector<BBox> boxes;
  boxes.reserve(detections.size());
  for (const auto& d : detections) boxes.push_back(d.box);
  return match_boxes(boxes, truths, width, height, config);
}

MatchOutcome score_reader_polygons(std::span<const Polygon> reader_regions, std::span<const Polygon> truths,
                                   int width, int height, const EvalConfig& config) {
  std::vector<BBox> boxes;
  boxes.reserve(reader_regions.size());
  for (const auto& poly : reader_regions) {
    const BinaryMask raster = rasterize_polygon(poly, width, height);
    std::vector<Pixel> pixels;
    for (int r = 0; r < height; ++r) {
      for (int c = 0; c < width; ++c) {
        if (raster.at(r, c)) pixels.push_back({r, c});
      }
    }
    if (pixels.empty()) {
      throw InvalidPolygonError("reader polygon covers no pixel centers on the canvas");
    }
    boxes.push_back(tight_bbox(pixels));
  }
  return match_boxes(boxes, truths, width, height, config);
}

Metrics compute_metrics(std::int64_t tp, std::int64_t fp, std::int64_t fn) {
  if (tp < 0 || fp < 0 || fn < 0) throw ConfigError("match counts must be non-negative");
  if (tp == 0 && fp == 0 && fn == 0) return Metrics{1.0, 1.0, 1.0};
  auto ratio = [](std::int64_t num, std::int64_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  Metrics m;
  m.precision = ratio(tp, tp + fp);
  m.recall = ratio(tp, tp + fn);
  const double sum = m.precision + m.recall;
  m.f1 = sum == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / sum;
  return m;
}

std::int64_t round_half_up_tenths(std::int64_t num, std::int64_t den) {
  // floor(1000 * num / den + 1/2) in exact integer arithmetic.
  return (2000 * num + den) / (2 * den);
}

PercentTenths percent_tenths(std::int64_t tp, std::int64_t fp, std::int64_t fn) {
  if (tp == 0 && fp == 0 && fn == 0) return PercentTenths{1000, 1000, 1000};
  auto pct = [](std::int64_t num, std::int64_t den) { return den == 0 ? 0 : round_half_up_tenths(num, den); };
  // With P = tp/(tp+fp) and R = tp/(tp+fn), the harmonic mean is exactly
  // 2tp / (2tp + fp + fn).
  return PercentTenths{pct(tp, tp + fn), pct(tp, tp + fp), tp == 0 ? 0 : pct(2 * tp, 2 * tp + fp + fn)};
}

MetricsReport aggregate_and_report(std::span<const ReaderOutcomes> readers, double iou_cutoff) {
  MetricsReport report;
  report.iou_cutoff = iou_cutoff;
  std::set<std::string> reference;
  for (std::size_t i = 0; i < readers.size(); ++i) {
    const auto& r = readers[i];
    if (r.images.size() != r.outcomes.size()) throw ConfigError("reader '" + r.name + "' has unpaired outcomes");
    std::set<std::string> images(r.images.begin(), r.images.end());
    if (images.size() != r.images.size()) throw ConfigError("reader '" + r.name + "' lists an image twice");
    if (i == 0) {
      reference = std::move(images);
    } else if (images != reference) {
      throw ConfigError("reader '" + r.name + "' covers a different image set than '" + readers[0].name + "'");
    }
    ReaderMetrics rm;
    rm.name = r.name;
    for (const auto& o : r.outcomes) {
      rm.tp += o.tp();
      rm.fp += o.fp();
      rm.fn += o.fn();
    }
    rm.metrics = compute_metrics(rm.tp, rm.fp, rm.fn);
    rm.percent = percent_tenths(rm.tp, rm.fp, rm.fn);
    report.per_reader.push_back(std::move(rm));
  }
  report.image_count = reference.size();
  return report;
}

namespace {

std::string tenths_to_string(std::int64_t tenths) {
  return std::to_string(tenths / 10) + "." + std::to_string(tenths % 10);
}

}  // namespace

std::string render_table(const MetricsReport& report) {
  constexpr int kLabel = 11;
  constexpr int kMinColumn = 9;
  std::vector<int> widths;
  for (const auto& r : report.per_reader) widths.push_back(std::max<int>(kMinColumn, static_cast<int>(r.name.size()) + 2));

  std::ostringstream os;
  auto cell = [&](const std::string& text, int width) {
    os << std::string(static_cast<std::size_t>(std::max<int>(0, width - static_cast<int>(text.size()))), ' ') << text;
  };
  os << std::string(kLabel, ' ');
  for (std::size_t i = 0; i < report.per_reader.size(); ++i) cell(report.per_reader[i].name, widths[i]);
  os << '\n';
  const std::pair<const char*, std::int64_t PercentTenths::*> rows[] = {
      {"Recall", &PercentTenths::recall}, {"Precision", &PercentTenths::precision}, {"F1-Score", &PercentTenths::f1}};
  for (const auto& [label, member] : rows) {
    os << label << std::string(kLabel - std::string(label).size(), ' ');
    for (std::size_t i = 0; i < report.per_reader.size(); ++i) {
      cell(tenths_to_string(report.per_reader[i].percent.*member), widths[i]);
    }
    os << '\n';
  }
  return os.str();
}

std::string report_to_json(const MetricsReport& report) {
  json readers = json::array();
  for (const auto& r : report.per_reader) {
    readers.push_back({{"name", r.name},
                       {"tp", r.tp},
                       {"fp", r.fp},
                       {"fn", r.fn},
                       {"precision", r.metrics.precision},
                       {"recall", r.metrics.recall},
                       {"f1", r.metrics.f1},
                       {"percent",
                        {{"recall", tenths_to_string(r.percent.recall)},
                         {"precision", tenths_to_string(r.percent.precision)},
                         {"f1", tenths_to_string(r.percent.f1)}}}});
  }
  json doc{{"iou_cutoff", report.iou_cutoff},
           {"images", report.image_count},
           {"readers", std::move(readers)},
           {"table", render_table(report)}};
  return doc.dump(1) + "\n";
}

MetricsReport report_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("report is not valid JSON: ") + e.what(), e.byte);
  }
  MetricsReport report;
  try {
    report.iou_cutoff = doc.at("iou_cutoff").get<double>();
    report.image_count = doc.at("images").get<std::size_t>();
    for (const auto& r : doc.at("readers")) {
      ReaderMetrics rm;
      rm.name = r.at("name").get<std::string>();
      rm.tp = r.at("tp").get<std::int64_t>();
      rm.fp = r.at("fp").get<std::int64_t>();
      rm.fn = r.at("fn").get<std::int64_t>();
      rm.metrics = compute_metrics(rm.tp, rm.fp, rm.fn);
      rm.percent = percent_tenths(rm.tp, rm.fp, rm.fn);
      report.per_reader.push_back(std::move(rm));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed report: ") + e.what());
  }
  return report;
}

void save_report(const MetricsReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << report_to_json(report);
  if (!out) throw IoError("failed writing " + path.string());
}

MetricsReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open report " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return report_from_json(text);
}

}  // namespace caries
