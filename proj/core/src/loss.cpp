#include "caries/loss.hpp"

#include <algorithm>
#include <cmath>

#include "caries/layers.hpp"

namespace caries {

namespace {

// log(1 + exp(x)) without overflow.
double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

}  // namespace

template <typename T>
LossResult<T> bce_loss(const BasicTensor<T>& logits, const BasicTensor<T>& target, T positive_weight) {
  if (logits.shape() != target.shape()) {
    throw ShapeError("loss shapes differ: " + to_string(logits.shape()) + " vs " + to_string(target.shape()));
  }
  const std::size_t n = logits.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  LossResult<T> out{T{0}, BasicTensor<T>(logits.shape())};
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double z = logits[i];
    const double t = target[i];
    const double weight = 1.0 + (static_cast<double>(positive_weight) - 1.0) * t;
    total += weight * (t * softplus(-z) + (1.0 - t) * softplus(z));
    out.grad[i] = static_cast<T>(weight * (static_cast<double>(stable_sigmoid(logits[i])) - t) * inv_n);
  }
  out.loss = static_cast<T>(total * inv_n);
  return out;
}

template LossResult<float> bce_loss(const BasicTensor<float>&, const BasicTensor<float>&, float);
template LossResult<double> bce_loss(const BasicTensor<double>&, const BasicTensor<double>&, double);

}  // namespace caries
