#include "caries/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "caries/error.hpp"
#include "caries/loss.hpp"
#include "caries/pgm.hpp"
#include "caries/rng.hpp"

namespace caries {

namespace {

constexpr std::uint64_t kShuffleStream = 1;

Shape example_shape(std::span<const TrainingExample> set) {
  const Shape s = set.front().image.shape();
  for (const auto& ex : set) {
    if (ex.image.shape() != s || ex.target.shape() != s) {
      throw ShapeError("training examples must share one (1, 1, H, W) shape");
    }
  }
  if (s.n != 1 || s.c != 1) throw ShapeError("training examples must be single-channel images");
  return s;
}

// Stacks examples[order[begin..end)] into one batch.
std::pair<Tensor, Tensor> make_batch(std::span<const TrainingExample> examples,
                                     std::span<const std::size_t> order, const Shape& s) {
  const int n = static_cast<int>(order.size());
  Tensor images(Shape{n, 1, s.h, s.w});
  Tensor targets(Shape{n, 1, s.h, s.w});
  const std::size_t plane = static_cast<std::size_t>(s.h) * s.w;
  for (int i = 0; i < n; ++i) {
    const auto& ex = examples[order[static_cast<std::size_t>(i)]];
    std::copy(ex.image.ptr(), ex.image.ptr() + plane, images.plane(i, 0));
    std::copy(ex.target.ptr(), ex.target.ptr() + plane, targets.plane(i, 0));
  }
  return {std::move(images), std::move(targets)};
}

// Factor that brings the global gradient norm down to `limit`.
float clip_scale(const NetworkGradients<float>& grads, double limit) {
  if (limit <= 0.0) return 1.0f;
  double sq = 0.0;
  for (const auto& g : grads) {
    for (float v : g.weight.data()) sq += static_cast<double>(v) * v;
    for (float v : g.bias) sq += static_cast<double>(v) * v;
  }
  const double norm = std::sqrt(sq);
  return norm > limit ? static_cast<float>(limit / norm) : 1.0f;
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
  if (!(positive_class_weight > 0.0)) throw ConfigError("positive_class_weight must be > 0");
  if (!(gradient_clip >= 0.0)) throw ConfigError("gradient_clip must be >= 0");
  if (early_stop_patience < 0) throw ConfigError("early_stop_patience must be >= 0");
}

Checkpoint initial_checkpoint(const NetworkConfig& net_config, std::uint64_t seed) {
  return Checkpoint{Network(net_config, seed), TrainingMetadata{0, std::numeric_limits<double>::infinity(), seed}};
}

double mean_loss(const Network& net, std::span<const TrainingExample> examples, double positive_weight,
                 int batch_size) {
  if (examples.empty()) throw ConfigError("cannot evaluate loss on an empty set");
  const Shape s = example_shape(examples);
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  double total = 0.0;
  for (std::size_t begin = 0; begin < order.size(); begin += static_cast<std::size_t>(batch_size)) {
    const std::size_t end = std::min(order.size(), begin + static_cast<std::size_t>(batch_size));
    auto [images, targets] = make_batch(examples, std::span(order).subspan(begin, end - begin), s);
    const Tensor logits = net.forward(images);
    total += static_cast<double>(bce_loss(logits, targets, static_cast<float>(positive_weight)).loss) *
             static_cast<double>(end - begin);
  }
  return total / static_cast<double>(examples.size());
}

TrainResult train_on_examples(const NetworkConfig& net_config, const TrainConfig& cfg,
                              std::span<const TrainingExample> train_set,
                              std::span<const TrainingExample> val_set, const EpochCallback& on_epoch) {
  net_config.validate();
  cfg.validate();
  TrainResult result{initial_checkpoint(net_config, cfg.seed), {}};
  if (cfg.epochs == 0) return result;
  if (train_set.empty() || val_set.empty()) throw ConfigError("training needs non-empty train and val sets");
  const Shape s = example_shape(train_set);
  if (example_shape(val_set) != s) throw ShapeError("train and val images differ in shape");
  net_config.check_input(s.h, s.w);

  Network net = result.checkpoint.network;
  std::vector<ConvParamGrads<float>> velocity;
  for (const auto& layer : net.layers()) {
    velocity.push_back({Tensor(layer.weight.shape()), std::vector<float>(layer.bias.size(), 0.0f)});
  }
  const auto lr = static_cast<float>(cfg.learning_rate);
  const auto mu = static_cast<float>(cfg.momentum);
  const auto pos_w = static_cast<float>(cfg.positive_class_weight);

  Rng shuffle_rng(cfg.seed, kShuffleStream);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  int since_improvement = 0;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order.begin(), order.end());
    double epoch_loss = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), begin + static_cast<std::size_t>(cfg.batch_size));
      auto [images, targets] = make_batch(train_set, std::span(order).subspan(begin, end - begin), s);
      ForwardCache<float> cache;
      const Tensor logits = net.forward(images, cache);
      const LossResult<float> loss = bce_loss(logits, targets, pos_w);
      const NetworkGradients<float> grads = net.backward(cache, loss.grad);
      epoch_loss += static_cast<double>(loss.loss) * static_cast<double>(end - begin);
      const float scale = clip_scale(grads, cfg.gradient_clip);

      for (std::size_t li = 0; li < net.layers().size(); ++li) {
        auto& layer = net.layers()[li];
        auto& vel = velocity[li];
        for (std::size_t i = 0; i < layer.weight.size(); ++i) {
          vel.weight[i] = mu * vel.weight[i] + scale * grads[li].weight[i];
          layer.weight[i] -= lr * vel.weight[i];
        }
        for (std::size_t i = 0; i < layer.bias.size(); ++i) {
          vel.bias[i] = mu * vel.bias[i] + scale * grads[li].bias[i];
          layer.bias[i] -= lr * vel.bias[i];
        }
      }
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = epoch_loss / static_cast<double>(order.size());
    rec.val_loss = mean_loss(net, val_set, cfg.positive_class_weight, cfg.batch_size);
    rec.improved = rec.val_loss < result.checkpoint.metadata.best_val_loss;
    if (rec.improved) {
      result.checkpoint.network = net;
      result.checkpoint.metadata.epoch = epoch;
      result.checkpoint.metadata.best_val_loss = rec.val_loss;
      since_improvement = 0;
    } else {
      ++since_improvement;
    }
    result.log.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);
    if (cfg.early_stop_patience > 0 && since_improvement >= cfg.early_stop_patience) {
      result.log.stopped_early = epoch < cfg.epochs;
      break;
    }
  }
  return result;
}

TrainingExample load_example(const SampleRecord& record, const std::filesystem::path& data_dir) {
  const GrayImage image = read_pgm(data_dir / record.image_path);
  if (image.width() != record.width || image.height() != record.height) {
    throw ConfigError("image " + record.image_path + " does not match its manifest dimensions");
  }
  const BinaryMask mask = region_mask(record);
  Tensor target(Shape{1, 1, record.height, record.width});
  const auto bits = mask.data();
  for (std::size_t i = 0; i < bits.size(); ++i) target[i] = bits[i] ? 1.0f : 0.0f;
  return TrainingExample{image_to_tensor(image), std::move(target)};
}

TrainResult train(const NetworkConfig& net_config, const TrainConfig& train_config,
                  const DatasetManifest& manifest, const std::filesystem::path& data_dir,
                  const EpochCallback& on_epoch) {
  if (!manifest.has_splits()) throw ConfigError("training requires a split manifest");
  const auto train_idx = manifest.indices(Split::train);
  const auto val_idx = manifest.indices(Split::val);
  if (train_idx.empty() || val_idx.empty()) throw ConfigError("manifest needs non-empty train and val splits");
  if (train_config.epochs == 0) {
    train_config.validate();
    return TrainResult{initial_checkpoint(net_config, train_config.seed), {}};
  }
  std::vector<TrainingExample> train_set;
  std::vector<TrainingExample> val_set;
  for (auto i : train_idx) train_set.push_back(load_example(manifest.records[i], data_dir));
  for (auto i : val_idx) val_set.push_back(load_example(manifest.records[i], data_dir));
  return train_on_examples(net_config, train_config, train_set, val_set, on_epoch);
}

}  // namespace caries
