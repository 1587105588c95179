#include "caries/postprocess.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>

#include "caries/error.hpp"
#include "json.hpp"

namespace caries {

using nlohmann::json;

void PostprocessConfig::validate() const {
  if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("threshold must lie in (0, 1)");
  if (min_component_area < 0) throw ConfigError("min_component_area must be >= 0");
}

BinaryMask threshold_map(const ProbabilityMap& map, double threshold) {
  if (map.values.size() != static_cast<std::size_t>(map.width) * map.height) {
    throw ShapeError("probability map data does not match its extents");
  }
  BinaryMask mask(map.width, map.height);
  for (int r = 0; r < map.height; ++r) {
    for (int c = 0; c < map.width; ++c) {
      if (static_cast<double>(map.at(r, c)) >= threshold) mask.set(r, c);
    }
  }
  return mask;
}

std::vector<Detection> detect(const ProbabilityMap& map, const PostprocessConfig& config) {
  config.validate();
  const BinaryMask mask = threshold_map(map, config.threshold);
  std::vector<Detection> out;
  for (const auto& comp : connected_components(mask)) {
    if (comp.size() < static_cast<std::size_t>(config.min_component_area)) continue;
    double sum = 0.0;
    for (const auto& p : comp) sum += static_cast<double>(map.at(p.row, p.col));
    out.push_back(Detection{tight_bbox(comp), std::clamp(sum / static_cast<double>(comp.size()), 0.0, 1.0)});
  }
  std::stable_sort(out.begin(), out.end(), [](const Detection& a, const Detection& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.box.y_min != b.box.y_min) return a.box.y_min < b.box.y_min;
    return a.box.x_min < b.box.x_min;
  });
  return out;
}

std::string predictions_to_json(const std::vector<ImagePredictions>& predictions) {
  json list = json::array();
  for (const auto& p : predictions) {
    json boxes = json::array();
    for (const auto& d : p.boxes) {
      boxes.push_back({{"x_min", d.box.x_min},
                       {"y_min", d.box.y_min},
                       {"x_max", d.box.x_max},
                       {"y_max", d.box.y_max},
                       {"score", d.score}});
    }
    list.push_back({{"image", p.image}, {"boxes", std::move(boxes)}});
  }
  return json{{"predictions", std::move(list)}}.dump(1) + "\n";
}

std::vector<ImagePredictions> predictions_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("predictions file is not valid JSON: ") + e.what(), e.byte);
  }
  std::vector<ImagePredictions> out;
  try {
    for (const auto& p : doc.at("predictions")) {
      ImagePredictions ip;
      ip.image = p.at("image").get<std::string>();
      for (const auto& b : p.at("boxes")) {
        Detection d;
        d.box = BBox::make(b.at("x_min").get<int>(), b.at("y_min").get<int>(), b.at("x_max").get<int>(),
                           b.at("y_max").get<int>());
        d.score = b.contains("score") ? b["score"].get<double>() : 1.0;
        if (!(d.score >= 0.0 && d.score <= 1.0)) throw ConfigError("detection score outside [0, 1]");
        ip.boxes.push_back(d);
      }
      out.push_back(std::move(ip));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed predictions file: ") + e.what());
  }
  return out;
}

void save_predictions(const std::vector<ImagePredictions>& predictions, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << predictions_to_json(predictions);
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<ImagePredictions> load_predictions(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open predictions " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return predictions_from_json(text);
}

}  // namespace caries
