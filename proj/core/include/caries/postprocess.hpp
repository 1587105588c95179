#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "caries/geometry.hpp"
#include "caries/network.hpp"

namespace caries {

struct PostprocessConfig {
  double threshold = 0.5;
  int min_component_area = 4;

  void validate() const;
};

struct Detection {
  BBox box;
  double score = 0.0;  // mean probability over the component's pixels

  bool operator==(const Detection&) const = default;
};

/// Foreground iff probability >= threshold.
BinaryMask threshold_map(const ProbabilityMap& map, double threshold);

/// Threshold, 8-connected components, drop components smaller than
/// min_component_area, then one tight box per survivor. Ordered by
/// descending score, ties by (y_min, x_min).
std::vector<Detection> detect(const ProbabilityMap& map, const PostprocessConfig& config);

struct ImagePredictions {
  std::string image;
  std::vector<Detection> boxes;
};

std::string predictions_to_json(const std::vector<ImagePredictions>& predictions);
std::vector<ImagePredictions> predictions_from_json(const std::string& text);
void save_predictions(const std::vector<ImagePredictions>& predictions, const std::filesystem::path& path);
std::vector<ImagePredictions> load_predictions(const std::filesystem::path& path);

}  // namespace caries
