#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>

#include "caries/geometry.hpp"
#include "caries/network.hpp"

namespace caries {

struct TrainingMetadata {
  int epoch = 0;
  double best_val_loss = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 0;

  bool operator==(const TrainingMetadata&) const = default;
};

struct Checkpoint {
  Network network;
  TrainingMetadata metadata;

  bool operator==(const Checkpoint&) const = default;
};

/// File layout:
///   bytes 0..7   magic "FCNNCKP1"
///   bytes 8..15  header length L, little-endian uint64
///   next L bytes JSON header: config, metadata, and for each parameter
///                (layer order, weight then bias) its name, shape, and byte
///                offset/length within the payload
///   payload      little-endian IEEE-754 float32 arrays in header order
std::string checkpoint_to_bytes(const Checkpoint& checkpoint);
/// Throws FormatError (with byte offset) on malformed input.
Checkpoint checkpoint_from_bytes(const std::string& bytes);

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Dense per-pixel lesion probabilities for one image.
ProbabilityMap predict_probabilities(const Checkpoint& checkpoint, const GrayImage& image);

}  // namespace caries
