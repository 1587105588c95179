#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "caries/geometry.hpp"
#include "caries/layers.hpp"
#include "caries/tensor.hpp"

namespace caries {

/// U-shaped encoder-decoder. Level l has base_channels << l channels; each
/// level runs two conv+relu blocks; decoders upsample, apply a learned conv,
/// concatenate the matching encoder output, then run two conv+relu blocks.
/// A final 1x1 conv produces one logit map.
struct NetworkConfig {
  int depth = 3;
  int base_channels = 8;
  int kernel_size = 3;

  void validate() const;
  /// Throws ShapeError unless both extents are divisible by 2^depth.
  void check_input(int height, int width) const;
  bool operator==(const NetworkConfig&) const = default;
};

template <typename T>
struct ConvParams {
  std::string name;
  BasicTensor<T> weight;  // (out_ch, in_ch, k, k)
  std::vector<T> bias;
  int padding = 0;

  bool operator==(const ConvParams&) const = default;
};

template <typename T>
struct ConvParamGrads {
  BasicTensor<T> weight;
  std::vector<T> bias;
};

template <typename T>
using NetworkGradients = std::vector<ConvParamGrads<T>>;

/// Activations kept by forward() for backward().
template <typename T>
struct ForwardCache {
  std::vector<BasicTensor<T>> conv_inputs;  // one per conv, in layer order
  std::vector<BasicTensor<T>> conv_outputs; // pre-activation, one per conv
};

template <typename T>
class BasicNetwork {
public:
  /// Fan-in scaled uniform weights (bound sqrt(6 / fan_in)), zero biases.
  BasicNetwork(const NetworkConfig& config, std::uint64_t seed);
  /// Layers of the right shapes, all zero. Used when loading parameters.
  static BasicNetwork zeros(const NetworkConfig& config);

  const NetworkConfig& config() const noexcept { return config_; }
  std::vector<ConvParams<T>>& layers() noexcept { return layers_; }
  const std::vector<ConvParams<T>>& layers() const noexcept { return layers_; }
  std::size_t parameter_count() const;

  /// Input (N, 1, H, W) -> logits (N, 1, H, W).
  BasicTensor<T> forward(const BasicTensor<T>& input) const;
  BasicTensor<T> forward(const BasicTensor<T>& input, ForwardCache<T>& cache) const;
  /// Gradients of every layer given d(loss)/d(logits).
  NetworkGradients<T> backward(const ForwardCache<T>& cache, const BasicTensor<T>& logit_grad) const;

  template <typename U>
  BasicNetwork<U> cast() const;

  bool operator==(const BasicNetwork&) const = default;

private:
  explicit BasicNetwork(const NetworkConfig& config);

  template <typename U>
  friend class BasicNetwork;

  NetworkConfig config_;
  std::vector<ConvParams<T>> layers_;
};

using Network = BasicNetwork<float>;

template <typename T>
template <typename U>
BasicNetwork<U> BasicNetwork<T>::cast() const {
  BasicNetwork<U> out(config_);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    out.layers_[i].weight = tensor_cast<U>(layers_[i].weight);
    out.layers_[i].bias.assign(layers_[i].bias.begin(), layers_[i].bias.end());
  }
  return out;
}

/// Per-pixel lesion probability, row-major, same extents as the source image.
struct ProbabilityMap {
  int width = 0;
  int height = 0;
  std::vector<float> values;

  float at(int row, int col) const { return values[static_cast<std::size_t>(row) * width + col]; }
  bool operator==(const ProbabilityMap&) const = default;
};

/// Intensities scaled by 1/255 into a (1, 1, H, W) tensor.
Tensor image_to_tensor(const GrayImage& image);

extern template class BasicNetwork<float>;
extern template class BasicNetwork<double>;

}  // namespace caries
