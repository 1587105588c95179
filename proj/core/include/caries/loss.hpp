#pragma once

#include "caries/tensor.hpp"

namespace caries {

template <typename T>
struct LossResult {
  T loss{};
  BasicTensor<T> grad;  // d(loss)/d(logits)
};

/// Mean weighted binary cross-entropy over all elements, evaluated from
/// pre-sigmoid logits. Pixels with target 1 carry `positive_weight`.
template <typename T>
LossResult<T> bce_loss(const BasicTensor<T>& logits, const BasicTensor<T>& target, T positive_weight);

}  // namespace caries
