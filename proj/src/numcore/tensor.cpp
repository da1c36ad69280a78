// Copyright 2026 The Anticipate Authors
// SPDX-License-Identifier: Apache-2.0

#include "anticipate/numcore/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "anticipate/errors.hpp"

namespace anticipate::numcore {

std::string shape_to_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << ',';
    out << shape[i];
  }
  out << ']';
  return out.str();
}

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return shape.empty() ? 0 : n;
}

Precision parse_precision(const std::string& name) {
  if (name == "check" || name == "64") return Precision::kCheck;
  if (name == "fast" || name == "32") return Precision::kFast;
  throw ParameterError("unknown precision mode '" + name + "' (expected check|fast)");
}

std::string precision_name(Precision p) { return p == Precision::kCheck ? "check" : "fast"; }

namespace {

void validate_shape(const Shape& shape) {
  if (shape.empty()) throw DimensionError("tensor shape must have at least one axis");
  for (auto d : shape) {
    if (d == 0) throw DimensionError("tensor dimensions must be >= 1, got " + shape_to_string(shape));
  }
}

}  // namespace

template <typename T>
Tensor<T>::Tensor(Shape shape, T fill) : shape_(std::move(shape)) {
  validate_shape(shape_);
  data_.assign(shape_size(shape_), fill);
}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> values) : shape_(std::move(shape)), data_(std::move(values)) {
  validate_shape(shape_);
  if (data_.size() != shape_size(shape_)) {
    throw DimensionError("tensor data length " + std::to_string(data_.size()) + " does not match shape " +
                         shape_to_string(shape_));
  }
}

template <typename T>
std::size_t Tensor<T>::dim(std::size_t axis) const {
  if (axis >= shape_.size()) {
    throw DimensionError("axis " + std::to_string(axis) + " out of range for shape " + shape_to_string(shape_));
  }
  return shape_[axis];
}

template <typename T>
void Tensor<T>::fill(T value) {
  std::fill(data_.begin(), data_.end(), value);
}

template <typename T>
Tensor<T> Tensor<T>::reshaped(Shape shape) const {
  if (shape_size(shape) != data_.size()) {
    throw DimensionError("cannot reshape " + shape_to_string(shape_) + " to " + shape_to_string(shape));
  }
  return Tensor(std::move(shape), data_);
}

template <typename T>
bool Tensor<T>::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](T v) { return std::isfinite(v); });
}

template class Tensor<float>;
template class Tensor<double>;

}  // namespace anticipate::numcore
