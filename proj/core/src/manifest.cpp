#include <fstream>
#include <iterator>
#include <set>

#include "caries/error.hpp"
#include "caries/synth.hpp"
#include "json.hpp"

namespace caries {

using nlohmann::json;

namespace {

json polygon_to_json(const Polygon& poly) {
  json points = json::array();
  for (const auto& v : poly.vertices()) points.push_back(json::array({v.x, v.y}));
  return json{{"points", std::move(points)}};
}

Polygon polygon_from_json(const json& j) {
  std::vector<Point> pts;
  for (const auto& p : j.at("points")) {
    if (!p.is_array() || p.size() != 2) throw ConfigError("region point must be [x, y]");
    pts.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  return Polygon(std::move(pts));
}

}  // namespace

void DatasetManifest::validate() const {
  std::set<std::string> paths;
  std::size_t labelled = 0;
  for (const auto& rec : records) {
    if (!paths.insert(rec.image_path).second) {
      throw ConfigError("duplicate image path '" + rec.image_path + "' in manifest");
    }
    if (rec.width < 1 || rec.height < 1) {
      throw ConfigError("record '" + rec.image_path + "' has non-positive dimensions");
    }
    for (const auto& poly : rec.regions) {
      for (const auto& v : poly.vertices()) {
        if (v.x < 0.0 || v.x > rec.width || v.y < 0.0 || v.y > rec.height) {
          throw ConfigError("record '" + rec.image_path + "' has a region vertex outside the image");
        }
      }
    }
    if (rec.split) ++labelled;
  }
  if (labelled != 0 && labelled != records.size()) {
    throw ConfigError("split labels must cover every record or none");
  }
}

std::string manifest_to_json(const DatasetManifest& manifest) {
  json samples = json::array();
  for (const auto& rec : manifest.records) {
    json s;
    s["image"] = rec.image_path;
    s["width"] = rec.width;
    s["height"] = rec.height;
    if (rec.split) s["split"] = to_string(*rec.split);
    json regions = json::array();
    for (const auto& poly : rec.regions) regions.push_back(polygon_to_json(poly));
    s["regions"] = std::move(regions);
    samples.push_back(std::move(s));
  }
  return json{{"samples", std::move(samples)}}.dump(1) + "\n";
}

DatasetManifest manifest_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("manifest is not valid JSON: ") + e.what(), e.byte);
  }
  DatasetManifest manifest;
  try {
    for (const auto& s : doc.at("samples")) {
      SampleRecord rec;
      rec.image_path = s.at("image").get<std::string>();
      rec.width = s.at("width").get<int>();
      rec.height = s.at("height").get<int>();
      if (s.contains("split") && !s["split"].is_null()) rec.split = split_from_string(s["split"].get<std::string>());
      if (s.contains("regions")) {
        for (const auto& r : s["regions"]) rec.regions.push_back(polygon_from_json(r));
      }
      manifest.records.push_back(std::move(rec));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed manifest: ") + e.what());
  }
  manifest.validate();
  return manifest;
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << manifest_to_json(manifest);
  if (!out) throw IoError("failed writing " + path.string());
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open manifest " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return manifest_from_json(text);
}

}  // namespace caries
