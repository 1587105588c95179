#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "caries/error.hpp"

namespace caries {

/// NCHW extents; every dimension is at least 1.
struct Shape {
  int n = 1;
  int c = 1;
  int h = 1;
  int w = 1;

  std::size_t size() const noexcept {
    return static_cast<std::size_t>(n) * c * h * w;
  }
  bool operator==(const Shape&) const = default;
};

std::string to_string(const Shape& s);

/// Dense row-major NCHW tensor. `Scalar` is float for training and inference;
/// double instantiations exist for gradient verification.
template <typename Scalar>
class BasicTensor {
public:
  using value_type = Scalar;

  BasicTensor() : data_(1, Scalar{0}) {}
  explicit BasicTensor(Shape shape, Scalar fill = Scalar{0});
  BasicTensor(Shape shape, std::vector<Scalar> data);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t size() const noexcept { return data_.size(); }
  std::span<Scalar> data() noexcept { return data_; }
  std::span<const Scalar> data() const noexcept { return data_; }
  Scalar* ptr() noexcept { return data_.data(); }
  const Scalar* ptr() const noexcept { return data_.data(); }

  Scalar& operator[](std::size_t i) { return data_[i]; }
  Scalar operator[](std::size_t i) const { return data_[i]; }
  Scalar& at(int n, int c, int h, int w) { return data_[offset(n, c, h, w)]; }
  Scalar at(int n, int c, int h, int w) const { return data_[offset(n, c, h, w)]; }

  /// Pointer to plane (n, c).
  Scalar* plane(int n, int c) { return data_.data() + offset(n, c, 0, 0); }
  const Scalar* plane(int n, int c) const { return data_.data() + offset(n, c, 0, 0); }

  bool operator==(const BasicTensor&) const = default;

private:
  std::size_t offset(int n, int c, int h, int w) const {
    return ((static_cast<std::size_t>(n) * shape_.c + c) * shape_.h + h) * shape_.w + w;
  }

  Shape shape_{};
  std::vector<Scalar> data_;
};

using Tensor = BasicTensor<float>;

template <typename To, typename From>
BasicTensor<To> tensor_cast(const BasicTensor<From>& t) {
  std::vector<To> out(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) out[i] = static_cast<To>(t[i]);
  return BasicTensor<To>(t.shape(), std::move(out));
}

extern template class BasicTensor<float>;
extern template class BasicTensor<double>;

}  // namespace caries
