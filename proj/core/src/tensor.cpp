#include "caries/tensor.hpp"

namespace caries {

namespace {

void check_shape(const Shape& s) {
  if (s.n < 1 || s.c < 1 || s.h < 1 || s.w < 1) {
    throw ShapeError("tensor dimensions must be >= 1, got " + to_string(s));
  }
}

}  // namespace

std::string to_string(const Shape& s) {
  return "(" + std::to_string(s.n) + ", " + std::to_string(s.c) + ", " + std::to_string(s.h) + ", " +
         std::to_string(s.w) + ")";
}

template <typename Scalar>
BasicTensor<Scalar>::BasicTensor(Shape shape, Scalar fill) : shape_(shape) {
  check_shape(shape_);
  data_.assign(shape_.size(), fill);
}

template <typename Scalar>
BasicTensor<Scalar>::BasicTensor(Shape shape, std::vector<Scalar> data)
    : shape_(shape), data_(std::move(data)) {
  check_shape(shape_);
  if (data_.size() != shape_.size()) {
    throw ShapeError("tensor data length " + std::to_string(data_.size()) + " does not match shape " +
                     to_string(shape_));
  }
}

template class BasicTensor<float>;
template class BasicTensor<double>;

}  // namespace caries
