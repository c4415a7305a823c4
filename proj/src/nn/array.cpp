// SPDX-License-Identifier: Apache-2.0
#include "qbc/nn/array.hpp"

#include <algorithm>
#include <cmath>

#include "qbc/errors.hpp"

namespace qbc::nn {

std::string shape_to_string(const Shape& shape) {
  std::string s = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + ")";
}

std::size_t shape_volume(const Shape& shape) {
  std::size_t v = 1;
  for (auto e : shape) v *= e;
  return v;
}

Array::Array(Shape shape, double fill)
    : shape_(std::move(shape)), data_(shape_volume(shape_), fill) {}

Array::Array(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_volume(shape_) != data_.size())
    throw DimensionError("array shape " + shape_to_string(shape_) +
                         " does not match data length " +
                         std::to_string(data_.size()));
}

void Array::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

void Array::reshape(Shape shape) {
  if (shape_volume(shape) != data_.size())
    throw DimensionError("cannot reshape " + shape_to_string(shape_) + " to " +
                         shape_to_string(shape));
  shape_ = std::move(shape);
}

bool Array::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

void Array::require_shape(const Shape& expected, const char* what) const {
  if (shape_ != expected)
    throw DimensionError(std::string(what) + ": expected shape " +
                         shape_to_string(expected) + ", got " +
                         shape_to_string(shape_));
}

}  // namespace qbc::nn
