#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "caries/checkpoint.hpp"
#include "caries/synth.hpp"

namespace caries {

struct TrainConfig {
  int epochs = 60;
  int batch_size = 8;
  double learning_rate = 0.05;
  double momentum = 0.9;
  double positive_class_weight = 5.0;
  /// Rescale each step's gradient so its global L2 norm is at most this; 0 disables.
  double gradient_clip = 1.0;
  /// Stop after this many epochs without validation improvement; 0 disables.
  int early_stop_patience = 10;
  std::uint64_t seed = 0;

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  bool improved = false;
};

struct TrainingLog {
  std::vector<EpochRecord> epochs;
  bool stopped_early = false;
};

struct TrainResult {
  Checkpoint checkpoint;  // lowest validation loss seen
  TrainingLog log;
};

/// One input image (1, 1, H, W) and its target mask of the same shape.
struct TrainingExample {
  Tensor image;
  Tensor target;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Freshly initialized network; parameters depend only on (config, seed).
Checkpoint initial_checkpoint(const NetworkConfig& net_config, std::uint64_t seed);

/// SGD with momentum over seeded mini-batches. Gradients are summed in
/// sample order, so results do not depend on scheduling.
TrainResult train_on_examples(const NetworkConfig& net_config, const TrainConfig& train_config,
                              std::span<const TrainingExample> train_set,
                              std::span<const TrainingExample> val_set,
                              const EpochCallback& on_epoch = {});

/// Loads the train and val splits of `manifest` from `data_dir`; targets are
/// the rasterized ground-truth regions.
TrainResult train(const NetworkConfig& net_config, const TrainConfig& train_config,
                  const DatasetManifest& manifest, const std::filesystem::path& data_dir,
                  const EpochCallback& on_epoch = {});

TrainingExample load_example(const SampleRecord& record, const std::filesystem::path& data_dir);

/// Mean loss of `net` over `examples`, evaluated in batches. Used for validation.
double mean_loss(const Network& net, std::span<const TrainingExample> examples, double positive_weight,
                 int batch_size);

}  // namespace caries
