#pragma once

#include <span>
#include <utility>
#include <vector>

#include "caries/tensor.hpp"

namespace caries {

/// Stride-1 cross-correlation with zero padding.
/// weights: (out_ch, in_ch, k, k); bias: out_ch entries.
template <typename T>
BasicTensor<T> conv2d_forward(const BasicTensor<T>& input, const BasicTensor<T>& weights,
                              std::span<const T> bias, int padding);

template <typename T>
struct ConvGradients {
  BasicTensor<T> input_grad;  // left default (1x1x1x1) when not requested
  BasicTensor<T> weight_grad;
  std::vector<T> bias_grad;
};

/// Weight and bias gradients are sums over the batch in sample order.
template <typename T>
ConvGradients<T> conv2d_backward(const BasicTensor<T>& input, const BasicTensor<T>& weights,
                                 const BasicTensor<T>& upstream, int padding,
                                 bool need_input_grad = true);

enum class Activation { relu, sigmoid };

template <typename T>
BasicTensor<T> activation_forward(const BasicTensor<T>& input, Activation kind);

/// `input` is the forward-pass input of the activation.
template <typename T>
BasicTensor<T> activation_backward(const BasicTensor<T>& input, const BasicTensor<T>& upstream,
                                   Activation kind);

/// Logistic function, stable for large |x|.
template <typename T>
T stable_sigmoid(T x);

/// 2x2 max-pool, stride 2. Odd spatial extents are a ShapeError.
template <typename T>
BasicTensor<T> maxpool2x2_forward(const BasicTensor<T>& input);

/// Routes each upstream value to the window argmax; ties go to the first
/// element in row-major order.
template <typename T>
BasicTensor<T> maxpool2x2_backward(const BasicTensor<T>& input, const BasicTensor<T>& upstream);

/// 2x nearest-neighbour upsampling.
template <typename T>
BasicTensor<T> upsample2x_forward(const BasicTensor<T>& input);

template <typename T>
BasicTensor<T> upsample2x_backward(const BasicTensor<T>& upstream);

/// Channel concatenation [a, b]; batch and spatial extents must agree.
template <typename T>
BasicTensor<T> concat_channels(const BasicTensor<T>& a, const BasicTensor<T>& b);

/// Inverse of concat_channels for gradients: first `channels_a` channels, then the rest.
template <typename T>
std::pair<BasicTensor<T>, BasicTensor<T>> split_channels(const BasicTensor<T>& t, int channels_a);

}  // namespace caries
