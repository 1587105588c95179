#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "caries/geometry.hpp"

namespace caries {

struct IntRange {
  int min = 0;
  int max = 0;
};

struct RealRange {
  double min = 0.0;
  double max = 0.0;
};

/// Parameters of the synthetic bitewing-like phantom generator.
struct PhantomConfig {
  int image_width = 128;
  int image_height = 128;
  int sample_count = 250;
  IntRange lesions_per_image{0, 3};
  /// Semi-axis range of the elliptical lesion core, pixels.
  RealRange lesion_radius{4.0, 10.0};
  /// Maximum outward dilation of an annotation polygon, pixels.
  double looseness = 2.0;
  double noise_sigma = 6.0;
  std::uint64_t seed = 0;

  /// Throws ConfigError on infeasible settings.
  void validate() const;
};

/// Ground-truth description of one rendered lesion.
struct Lesion {
  double center_x = 0.0;
  double center_y = 0.0;
  double semi_x = 0.0;
  double semi_y = 0.0;
  /// Annotation slack; also the width of the visible diffuse margin.
  double margin = 0.0;
  double depth = 0.0;
};

struct PhantomSample {
  GrayImage image;
  std::vector<Polygon> regions;
  std::vector<Lesion> lesions;
};

/// Renders sample `index`. A pure function of (config, index).
PhantomSample render_phantom(const PhantomConfig& config, std::size_t index);

/// Pixels whose centers lie inside the lesion's core ellipse.
BinaryMask lesion_core_mask(const Lesion& lesion, int width, int height);

enum class Split { train, val, test };

std::string to_string(Split split);
/// Throws ConfigError for anything but "train", "val", "test".
Split split_from_string(const std::string& name);

struct SampleRecord {
  std::string image_path;
  int width = 0;
  int height = 0;
  std::vector<Polygon> regions;
  std::optional<Split> split;
};

struct DatasetManifest {
  std::vector<SampleRecord> records;

  bool has_splits() const;
  /// Record indices carrying `split`, in manifest order.
  std::vector<std::size_t> indices(Split split) const;
  /// Unique paths, vertex bounds, and all-or-nothing split labels.
  void validate() const;
};

/// Writes img_%05d.pgm files plus manifest.json into `output_dir`.
DatasetManifest generate_dataset(const PhantomConfig& config,
                                 const std::filesystem::path& output_dir);

/// Seeded permutation split: test = floor(N * test_fraction),
/// val = floor((N - test) * val_fraction_of_train), the rest train.
DatasetManifest split_dataset(const DatasetManifest& manifest, double test_fraction,
                              double val_fraction_of_train, std::uint64_t seed);

std::string manifest_to_json(const DatasetManifest& manifest);
DatasetManifest manifest_from_json(const std::string& text);
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);
DatasetManifest load_manifest(const std::filesystem::path& path);

/// Union of the rasterized regions of a record.
BinaryMask region_mask(const SampleRecord& record);

}  // namespace caries
