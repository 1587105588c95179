#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "caries/checkpoint.hpp"
#include "caries/error.hpp"
#include "caries/synth.hpp"
#include "caries/train.hpp"
#include "support/oracles.hpp"

using namespace caries;
namespace fs = std::filesystem;

namespace {

// Four 32x32 images, each with one bright square on a dark field.
std::vector<TrainingExample> tiny_set() {
  std::vector<TrainingExample> set;
  for (int k = 0; k < 4; ++k) {
    Tensor img(Shape{1, 1, 32, 32}, 0.2f);
    Tensor tgt(Shape{1, 1, 32, 32});
    const int r0 = 4 + 6 * k;
    const int c0 = 20 - 5 * k;
    for (int r = r0; r < r0 + 6; ++r) {
      for (int c = c0; c < c0 + 6; ++c) {
        img.at(0, 0, r, c) = 0.8f;
        tgt.at(0, 0, r, c) = 1.0f;
      }
    }
    set.push_back({img, tgt});
  }
  return set;
}

TrainConfig overfit_config() {
  TrainConfig tc;
  tc.epochs = 200;
  tc.batch_size = 4;
  // Full-batch steps with mild momentum, so the smoothed loss curve is a
  // property of the optimizer rather than of shuffling noise.
  tc.learning_rate = 0.02;
  tc.momentum = 0.5;
  tc.early_stop_patience = 0;
  tc.seed = 3;
  return tc;
}

const NetworkConfig kSmallNet{2, 4, 3};

}  // namespace

TEST(Train, ZeroEpochsReturnsInitialization) {
  TrainConfig tc;
  tc.epochs = 0;
  tc.seed = 11;
  const auto set = tiny_set();
  const TrainResult r = train_on_examples(kSmallNet, tc, set, set);
  EXPECT_EQ(r.checkpoint, initial_checkpoint(kSmallNet, 11));
  EXPECT_TRUE(r.log.epochs.empty());
}

TEST(Train, ConfigValidation) {
  TrainConfig tc;
  tc.learning_rate = 0.0;
  EXPECT_THROW(tc.validate(), ConfigError);
  tc = TrainConfig{};
  tc.batch_size = 0;
  EXPECT_THROW(tc.validate(), ConfigError);
  tc = TrainConfig{};
  tc.positive_class_weight = -1.0;
  EXPECT_THROW(tc.validate(), ConfigError);
  tc = TrainConfig{};
  tc.gradient_clip = -0.5;
  EXPECT_THROW(tc.validate(), ConfigError);
}

// One full-batch step without momentum moves the parameters by exactly
// lr * min(|g|, clip), so the update norm is bounded by lr * clip.
TEST(Train, ClippedStepNormIsBounded) {
  const auto set = tiny_set();
  TrainConfig tc = overfit_config();
  tc.epochs = 1;
  tc.momentum = 0.0;
  tc.learning_rate = 0.5;
  tc.gradient_clip = 1e-3;
  const Checkpoint before = initial_checkpoint(kSmallNet, tc.seed);
  const TrainResult r = train_on_examples(kSmallNet, tc, set, set);
  double sq = 0.0;
  for (std::size_t li = 0; li < before.network.layers().size(); ++li) {
    const auto& a = before.network.layers()[li];
    const auto& b = r.checkpoint.network.layers()[li];
    for (std::size_t i = 0; i < a.weight.size(); ++i) sq += std::pow(double{b.weight[i]} - a.weight[i], 2);
    for (std::size_t i = 0; i < a.bias.size(); ++i) sq += std::pow(double{b.bias[i]} - a.bias[i], 2);
  }
  EXPECT_GT(std::sqrt(sq), 0.0);
  EXPECT_LE(std::sqrt(sq), tc.learning_rate * tc.gradient_clip * (1.0 + 1e-3));
}

TEST(Train, OverfitsFourSamples) {
  const auto set = tiny_set();
  const TrainResult r = train_on_examples(kSmallNet, overfit_config(), set, set);
  ASSERT_EQ(r.log.epochs.size(), 200u);
  EXPECT_LT(r.log.epochs.back().train_loss, 0.05);

  // Ten-epoch moving average never rises.
  std::vector<double> smooth;
  for (std::size_t i = 9; i < r.log.epochs.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = i - 9; j <= i; ++j) s += r.log.epochs[j].train_loss;
    smooth.push_back(s / 10.0);
  }
  for (std::size_t i = 1; i < smooth.size(); ++i) EXPECT_LE(smooth[i], smooth[i - 1] + 1e-9) << "window " << i;
}

TEST(Train, IdenticalRunsGiveIdenticalParameters) {
  const auto set = tiny_set();
  TrainConfig tc = overfit_config();
  tc.epochs = 5;
  tc.batch_size = 3;
  const TrainResult a = train_on_examples(kSmallNet, tc, set, set);
  const TrainResult b = train_on_examples(kSmallNet, tc, set, set);
  EXPECT_EQ(a.checkpoint, b.checkpoint);
  EXPECT_EQ(checkpoint_to_bytes(a.checkpoint), checkpoint_to_bytes(b.checkpoint));
}

TEST(Train, KeepsBestValidationEpochAndStopsEarly) {
  const auto set = tiny_set();
  TrainConfig tc = overfit_config();
  tc.epochs = 40;
  tc.learning_rate = 2.0;  // unstable on purpose
  tc.early_stop_patience = 3;
  const TrainResult r = train_on_examples(kSmallNet, tc, set, set);
  double best = std::numeric_limits<double>::infinity();
  int best_epoch = 0;
  for (const auto& e : r.log.epochs) {
    if (e.val_loss < best) {
      best = e.val_loss;
      best_epoch = e.epoch;
    }
  }
  EXPECT_EQ(r.checkpoint.metadata.epoch, best_epoch);
  EXPECT_EQ(r.checkpoint.metadata.best_val_loss, best);
  EXPECT_NEAR(mean_loss(r.checkpoint.network, set, tc.positive_class_weight, 4), best, 1e-6);
  if (r.log.stopped_early) {
    EXPECT_EQ(r.log.epochs.back().epoch - best_epoch, 3);
  }
}

TEST(Train, ShapeMismatchRejected) {
  auto set = tiny_set();
  set[1].target = Tensor(Shape{1, 1, 16, 16});
  TrainConfig tc = overfit_config();
  tc.epochs = 1;
  EXPECT_THROW(train_on_examples(kSmallNet, tc, set, set), ShapeError);
}

TEST(Train, ManifestWithoutSplitsIsConfigError) {
  DatasetManifest m;
  m.records.push_back({"a.pgm", 32, 32, {}, std::nullopt});
  EXPECT_THROW(train(kSmallNet, TrainConfig{}, m, "."), ConfigError);
}

TEST(Train, MissingImageIsIoError) {
  DatasetManifest m;
  m.records.push_back({"missing_a.pgm", 32, 32, {}, Split::train});
  m.records.push_back({"missing_b.pgm", 32, 32, {}, Split::val});
  TrainConfig tc;
  tc.epochs = 1;
  EXPECT_THROW(train(kSmallNet, tc, m, fs::temp_directory_path() / "caries_nowhere"), IoError);
}

TEST(Train, LoadsExamplesFromDataset) {
  const fs::path dir = fs::temp_directory_path() / "caries_train_ds";
  fs::remove_all(dir);
  PhantomConfig pc;
  pc.sample_count = 6;
  pc.image_width = 32;
  pc.image_height = 32;
  pc.lesion_radius = {3.0, 5.0};
  pc.lesions_per_image = {1, 2};
  const DatasetManifest m = split_dataset(generate_dataset(pc, dir), 0.0, 0.34, 1);
  const TrainingExample ex = load_example(m.records[0], dir);
  const BinaryMask truth = region_mask(m.records[0]);
  float sum = 0.0f;
  for (float v : ex.target.data()) sum += v;
  EXPECT_EQ(static_cast<std::size_t>(sum), truth.count());
  TrainConfig tc;
  tc.epochs = 2;
  tc.batch_size = 2;
  const TrainResult r = train(kSmallNet, tc, m, dir);
  EXPECT_EQ(r.log.epochs.size(), 2u);
  fs::remove_all(dir);
}
